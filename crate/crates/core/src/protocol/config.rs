use serde::{Deserialize, Serialize};

use super::SecretString;
use crate::qudit::{Dimension, MAX_AMPLITUDES};
use crate::{Error, Result, Violation};

/// Parameters of one protocol run.
///
/// `samples` (`q`) is only used by the improved protocol; `q = 0` skips the
/// correlation check. Both thresholds default to 0, so any observed error
/// aborts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    #[serde(rename = "n")]
    pub parties: usize,
    #[serde(rename = "d")]
    pub dim: Dimension,
    pub length: usize,
    #[serde(rename = "q")]
    pub samples: usize,
    pub decoys_per_channel: usize,
    pub channel_error_threshold: f64,
    pub correlation_error_threshold: f64,
    pub seed: u64,
}

pub const DEFAULT_DECOYS_PER_CHANNEL: usize = 8;

impl ProtocolConfig {
    pub fn new(parties: usize, dim: Dimension, length: usize) -> Self {
        ProtocolConfig {
            parties,
            dim,
            length,
            samples: 0,
            decoys_per_channel: DEFAULT_DECOYS_PER_CHANNEL,
            channel_error_threshold: 0.0,
            correlation_error_threshold: 0.0,
            seed: 0,
        }
    }

    pub fn with_samples(mut self, q: usize) -> Self {
        self.samples = q;
        self
    }

    pub fn with_decoys(mut self, decoys: usize) -> Self {
        self.decoys_per_channel = decoys;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_thresholds(mut self, channel: f64, correlation: f64) -> Self {
        self.channel_error_threshold = channel;
        self.correlation_error_threshold = correlation;
        self
    }

    /// Every violated bound, in field order.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &str, reason: String| {
            out.push(Violation {
                field: field.to_string(),
                reason,
            })
        };
        if self.parties < 3 {
            push("n", format!("party count must exceed 2, got {}", self.parties));
        }
        let amps = (self.dim.get() as u128).checked_pow(self.parties as u32);
        if amps.is_none_or(|a| a > MAX_AMPLITUDES as u128) {
            push(
                "n",
                format!(
                    "d^n = {}^{} exceeds the state size limit of {MAX_AMPLITUDES} amplitudes",
                    self.dim, self.parties
                ),
            );
        }
        if self.length == 0 {
            push("length", "secret strings need at least one digit".into());
        }
        for (field, v) in [
            ("channel_error_threshold", self.channel_error_threshold),
            ("correlation_error_threshold", self.correlation_error_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                push(field, format!("must lie in [0, 1], got {v}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Checks that `secrets` holds one length-`N` string per party, in order.
    pub fn validate_secrets(&self, secrets: &[SecretString]) -> Result<()> {
        let mut v = Vec::new();
        if secrets.len() != self.parties {
            v.push(Violation {
                field: "secrets".into(),
                reason: format!("expected {} strings, got {}", self.parties, secrets.len()),
            });
        }
        for (i, s) in secrets.iter().enumerate() {
            if s.owner.index() != i {
                v.push(Violation {
                    field: "secrets".into(),
                    reason: format!("string {} belongs to {}, expected P{}", i + 1, s.owner, i + 1),
                });
            }
            if s.digits.len() != self.length {
                v.push(Violation {
                    field: "secrets".into(),
                    reason: format!("{} has {} digits, expected {}", s.owner, s.digits.len(), self.length),
                });
            }
            if let Some(&bad) = s.digits.iter().find(|&&x| x >= self.dim.get()) {
                v.push(Violation {
                    field: "secrets".into(),
                    reason: format!("{} digit {bad} is not below d = {}", s.owner, self.dim),
                });
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}
