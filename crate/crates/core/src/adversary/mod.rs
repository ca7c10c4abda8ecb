//! Attacks on the summation protocols.
//!
//! `P1` prepares every shared state, so she can substitute states of her own
//! choosing:
//!
//! - Attack 1: collapse each entangled state to `|r⟩^{⊗n}`, send `F†|r⟩`
//!   components; an honest `U_k·F` encoding then announces `r ⊕ k`.
//! - Attack 2: send component 1 of `d^{-1/2} Σ_r |r⟩ F|r⟩ … F|r⟩` to one target
//!   and keep the rest; the target's announcement plus her own outcomes sum to
//!   the target's digit.
//! - Fake state: against the improved protocol, hide `(F|r⟩)^{⊗n}` among genuine
//!   states and hope the correlation check does not sample it.
//!
//! An outside intercept-resend eavesdropper ([`InterceptResend`]) serves as the
//! baseline for the decoy check.

mod attacks;
mod eve;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::protocol::{PartyId, SecretString, Verdict};
use crate::{Error, Result};

pub use attacks::{attack1_run, attack2_run, attack2_support_check, fake_state_attack_run, Attack2Check};
pub use eve::{eve_decoy_trial, intercept_resend_eve, EveRecord};

/// Behaviour of the state-preparing party `P1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum P1Strategy {
    #[default]
    Honest,
    Attack1,
    /// Steal digit `digit` (0-based) of `party`.
    Attack2 { party: PartyId, digit: usize },
    /// Replace `count` of the `N + q` states by `(F|r⟩)^{⊗n}`.
    FakeState { r: usize, count: usize },
}

impl P1Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            P1Strategy::Honest => "honest",
            P1Strategy::Attack1 => "attack1",
            P1Strategy::Attack2 { .. } => "attack2",
            P1Strategy::FakeState { .. } => "fake_state",
        }
    }

    pub fn is_honest(&self) -> bool {
        matches!(self, P1Strategy::Honest)
    }
}

/// Outside eavesdropper: each transmitted qudit is attacked with probability
/// `fraction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptResend {
    pub fraction: f64,
}

impl InterceptResend {
    pub fn new(fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidConfig {
                field: "fraction",
                reason: format!("must lie in [0, 1], got {fraction}"),
            });
        }
        Ok(InterceptResend { fraction })
    }
}

/// Scenario-level attack descriptor, covering both insider and outsider.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackStrategy {
    #[default]
    Honest,
    Attack1,
    Attack2 { party: PartyId, digit: usize },
    FakeState { r: usize, count: usize },
    InterceptResend { fraction: f64 },
}

impl AttackStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            AttackStrategy::Honest => "honest",
            AttackStrategy::Attack1 => "attack1",
            AttackStrategy::Attack2 { .. } => "attack2",
            AttackStrategy::FakeState { .. } => "fake_state",
            AttackStrategy::InterceptResend { .. } => "intercept_resend",
        }
    }

    /// Splits into the `P1` behaviour and the channel adversary.
    pub fn split(self) -> Result<(P1Strategy, Option<InterceptResend>)> {
        Ok(match self {
            AttackStrategy::Honest => (P1Strategy::Honest, None),
            AttackStrategy::Attack1 => (P1Strategy::Attack1, None),
            AttackStrategy::Attack2 { party, digit } => (P1Strategy::Attack2 { party, digit }, None),
            AttackStrategy::FakeState { r, count } => (P1Strategy::FakeState { r, count }, None),
            AttackStrategy::InterceptResend { fraction } => {
                (P1Strategy::Honest, Some(InterceptResend::new(fraction)?))
            }
        })
    }
}

/// Ordering of announcements in the correlation check.
///
/// `P1First`: `P1` commits to her outcome before the others speak.
/// `P1LastAdaptive`: `P1` hears everyone else first and may pick any value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnouncementModel {
    #[default]
    P1First,
    P1LastAdaptive,
}

impl std::str::FromStr for AnnouncementModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p1_first" | "first" => Ok(AnnouncementModel::P1First),
            "p1_last_adaptive" | "adaptive" | "last" => Ok(AnnouncementModel::P1LastAdaptive),
            other => Err(Error::InvalidConfig {
                field: "announcement_model",
                reason: format!("unknown model {other:?} (expected p1_first or p1_last_adaptive)"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionStage {
    Channel,
    Correlation,
}

/// How `P1` turned an announcement into a guess.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ExtractionRule {
    /// `k = m ⊖ r`, with `r` the value `P1` prepared.
    SubtractPrepared { r: usize },
    /// `k = m ⊕ l_2 ⊕ … ⊕ l_n`, with `l_i` the outcomes of the components `P1` kept.
    AddHeldOutcomes { held: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionStep {
    pub party: PartyId,
    pub digit: usize,
    pub announced: usize,
    pub rule: ExtractionRule,
    pub guess: usize,
    /// Guess made at a genuine state because the fake one was consumed by the
    /// correlation check.
    pub blind: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FakeStateFate {
    pub position: usize,
    pub sampled: bool,
}

/// What the adversary learned in one run and whether she was caught.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AdversaryReport {
    #[serde(with = "recovered_list")]
    pub recovered: BTreeMap<(PartyId, usize), usize>,
    pub extractions: Vec<ExtractionStep>,
    pub fake_states: Vec<FakeStateFate>,
    /// Filled in by the harness from the true secrets; never by the adversary.
    pub correct_fraction: Option<f64>,
    pub detected: bool,
    pub detection_stage: Option<DetectionStage>,
}

impl AdversaryReport {
    /// Records a guess. Blind guesses never replace an informed one.
    pub fn record(&mut self, step: ExtractionStep) {
        let key = (step.party, step.digit);
        let informed_present = self
            .extractions
            .iter()
            .any(|s| (s.party, s.digit) == key && !s.blind);
        if !step.blind || !informed_present {
            self.recovered.insert(key, step.guess);
        }
        self.extractions.push(step);
    }

    pub fn set_verdict(&mut self, verdict: &Verdict) {
        self.detection_stage = match verdict {
            Verdict::Completed { .. } => None,
            Verdict::AbortedChannel { .. } => Some(DetectionStage::Channel),
            Verdict::AbortedCorrelation => Some(DetectionStage::Correlation),
        };
        self.detected = self.detection_stage.is_some();
    }

    /// Fraction of recovered digits that match the true secrets, or `None` if
    /// nothing was recovered.
    pub fn accuracy(&self, secrets: &[SecretString]) -> Option<f64> {
        if self.recovered.is_empty() {
            return None;
        }
        let correct = self
            .recovered
            .iter()
            .filter(|((party, digit), guess)| {
                secrets
                    .get(party.index())
                    .and_then(|s| s.digits.get(*digit))
                    .is_some_and(|k| k == *guess)
            })
            .count();
        Some(correct as f64 / self.recovered.len() as f64)
    }

    pub fn score(&mut self, secrets: &[SecretString]) {
        self.correct_fraction = self.accuracy(secrets);
    }

    /// True if at least one fake state was prepared and none was sampled.
    pub fn all_fakes_escaped(&self) -> bool {
        !self.fake_states.is_empty() && self.fake_states.iter().all(|f| !f.sampled)
    }
}

mod recovered_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        party: PartyId,
        digit: usize,
        value: usize,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<(PartyId, usize), usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map
            .iter()
            .map(|(&(party, digit), &value)| Entry { party, digit, value })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<(PartyId, usize), usize>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| ((e.party, e.digit), e.value)).collect())
    }
}
