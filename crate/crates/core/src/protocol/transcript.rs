use serde::{Deserialize, Serialize};

use super::{Announcement, DecoyRecord, PartyId, ProtocolConfig};
use crate::adversary::EveRecord;
use crate::qudit::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Yy2018,
    Improved,
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProtocolKind::Yy2018 => write!(f, "yy2018"),
            ProtocolKind::Improved => write!(f, "improved"),
        }
    }
}

/// What `P1` actually prepared at one position (simulator ground truth).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreparedKind {
    /// Genuine `d^{-1/2} Σ_r |r⟩^{⊗n}`.
    Omega,
    /// Entangled state measured to `|r⟩^{⊗n}`, then `F†` on every component.
    InverseFourierProduct { r: usize },
    /// `d^{-1/2} Σ_r |r⟩ F|r⟩ … F|r⟩`; component 1 goes to `target`, the rest stay with `P1`.
    RotatedOmega { target: PartyId },
    /// Genuine `(n-1)`-component state covering every party except `excluded`.
    ReducedOmega { excluded: PartyId },
    /// Fake product `(F|r⟩)^{⊗n}`.
    FourierProduct { r: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedState {
    /// Position (digit index in YY2018, state index in the improved protocol).
    pub position: usize,
    pub kind: PreparedKind,
}

/// Transmission of one sequence `S'_j` and its decoy check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEvent {
    pub receiver: PartyId,
    pub slots: usize,
    pub decoys: Vec<DecoyRecord>,
    pub interceptions: Vec<EveRecord>,
    pub error_rate: f64,
    pub passed: bool,
}

/// One sampled state of the correlation check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCheck {
    pub position: usize,
    pub basis: Basis,
    /// Announced outcomes, `P1` first.
    pub announced: Vec<usize>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEvent {
    pub samples: Vec<SampleCheck>,
    pub error_rate: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Completed { sum: Vec<usize> },
    AbortedChannel { receiver: PartyId },
    AbortedCorrelation,
}

impl Verdict {
    pub fn is_completed(&self) -> bool {
        matches!(self, Verdict::Completed { .. })
    }
}

/// Ordered record of a single run.
///
/// Events appear in protocol order: preparation, channel checks, the
/// correlation check (improved protocol only), announcements, verdict. An
/// aborted run has no announcements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub protocol: ProtocolKind,
    pub config: ProtocolConfig,
    pub preparation: Vec<PreparedState>,
    pub channels: Vec<ChannelEvent>,
    pub correlation: Option<CorrelationEvent>,
    pub announcements: Vec<Announcement>,
    pub verdict: Verdict,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts always serialize")
    }
}
