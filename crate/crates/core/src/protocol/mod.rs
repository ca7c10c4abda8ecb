//! Party state machines for the two summation protocols.
//!
//! [`run_yy2018`] implements the QFT-encoding protocol: `P1` distributes one
//! component of each of `N` entangled states to every other party behind
//! decoy qudits, every party applies `U_k·F` to encode a digit, measures in the
//! computational basis, and `P1` adds the results.
//!
//! [`run_improved`] prepares `N + q` states, lets `P2..Pn` sample `q` of them for
//! a correlation check, and replaces the encoding with a Fourier-basis
//! measurement followed by classical addition.
//!
//! The simulator holds every entangled state jointly; a party's sequence is a
//! list of `(state, site)` references with decoy slots interleaved.

mod config;
pub(crate) mod correlation;
mod decoy;
mod equivalence;
mod improved;
mod session;
mod transcript;
mod yy2018;

use serde::{Deserialize, Serialize};

use crate::adversary::AdversaryReport;
use crate::qudit::Dimension;
use crate::{Error, Result};

pub use config::{ProtocolConfig, DEFAULT_DECOYS_PER_CHANNEL};
pub use correlation::{correlation_check, CorrelationOutcome};
pub use decoy::{decoy_check, DecoyRecord, QuditSequence, Slot};
pub use equivalence::{encode_equivalence_probe, total_variation};
pub use improved::run_improved;
pub use transcript::{
    ChannelEvent, CorrelationEvent, PreparedKind, PreparedState, ProtocolKind, SampleCheck,
    Transcript, Verdict,
};
pub use yy2018::run_yy2018;

/// 1-based party label; `P1` prepares the entangled states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct PartyId(usize);

impl PartyId {
    pub const PREPARER: PartyId = PartyId(1);

    pub fn new(label: usize) -> Result<Self> {
        if label == 0 {
            return Err(Error::InvalidConfig {
                field: "party",
                reason: "party labels start at 1".into(),
            });
        }
        Ok(PartyId(label))
    }

    /// Party for a 0-based site/index.
    pub fn from_index(index: usize) -> Self {
        PartyId(index + 1)
    }

    pub fn label(self) -> usize {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl TryFrom<usize> for PartyId {
    type Error = Error;
    fn try_from(v: usize) -> Result<Self> {
        PartyId::new(v)
    }
}

impl From<PartyId> for usize {
    fn from(p: PartyId) -> usize {
        p.0
    }
}

impl std::fmt::Display for PartyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// Child stream index reserved for drawing random secrets.
pub const SECRETS_STREAM: u64 = 4;

/// A party's private string `K_i` over `Z_d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretString {
    pub owner: PartyId,
    pub digits: Vec<usize>,
}

impl SecretString {
    pub fn new(owner: PartyId, digits: Vec<usize>, dim: Dimension) -> Result<Self> {
        for &x in &digits {
            dim.check_digit(x)?;
        }
        Ok(SecretString { owner, digits })
    }

    pub fn random<R: rand::Rng + ?Sized>(owner: PartyId, len: usize, dim: Dimension, rng: &mut R) -> Self {
        let digits = (0..len).map(|_| rng.random_range(0..dim.get())).collect();
        SecretString { owner, digits }
    }

    /// Random secrets for `P1..Pn` drawn from the secrets stream of `seed`,
    /// which no other part of a run consumes.
    pub fn random_set(parties: usize, len: usize, dim: Dimension, seed: u64) -> Vec<Self> {
        let mut rng = crate::seed::stream(seed, SECRETS_STREAM);
        (0..parties)
            .map(|i| SecretString::random(PartyId::from_index(i), len, dim, &mut rng))
            .collect()
    }

    /// One secret per party, `P1..Pn`, from explicit digit lists.
    pub fn from_lists(lists: &[Vec<usize>], dim: Dimension) -> Result<Vec<Self>> {
        lists
            .iter()
            .enumerate()
            .map(|(i, d)| SecretString::new(PartyId::from_index(i), d.clone(), dim))
            .collect()
    }
}

/// Classical message from one party to `P1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub party: PartyId,
    pub payload: Vec<usize>,
}

/// Digitwise sum modulo `d` of equal-length announcements.
pub fn compute_sum(dim: Dimension, announcements: &[Announcement]) -> Result<Vec<usize>> {
    let Some(first) = announcements.first() else {
        return Ok(Vec::new());
    };
    let len = first.payload.len();
    let mut sum = vec![0; len];
    for a in announcements {
        if a.payload.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: a.payload.len(),
            });
        }
        for (acc, &x) in sum.iter_mut().zip(&a.payload) {
            *acc = dim.add(*acc, dim.check_digit(x)?);
        }
    }
    Ok(sum)
}

/// `K = K_1 ⊕ … ⊕ K_n`, computed directly from the secrets.
pub fn reference_sum(dim: Dimension, secrets: &[SecretString]) -> Vec<usize> {
    let len = secrets.first().map_or(0, |s| s.digits.len());
    (0..len)
        .map(|t| dim.sum(secrets.iter().map(|s| s.digits[t])))
        .collect()
}

/// Everything one protocol run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    /// Published sum; `None` whenever the run aborted.
    pub sum: Option<Vec<usize>>,
    pub transcript: Transcript,
    pub report: AdversaryReport,
}

impl RoundResult {
    pub fn completed(&self) -> bool {
        matches!(self.transcript.verdict, Verdict::Completed { .. })
    }

    /// Machine-readable record of the run (transcript plus adversary report).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("round results always serialize")
    }
}
