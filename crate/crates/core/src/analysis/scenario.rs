use serde::{Deserialize, Serialize};

use super::exact::{
    conditional_pass_probability, escape_probability, eve_detection_probability, ExactProbability,
};
use super::monte_carlo::{monte_carlo, MonteCarloEstimate};
use crate::adversary::{attack1_run, eve_decoy_trial, fake_state_attack_run, AnnouncementModel, P1Strategy};
use crate::protocol::{
    correlation_check, reference_sum, run_improved, run_yy2018, PartyId, ProtocolConfig, ProtocolKind,
    SecretString,
};
use crate::qudit::{fourier_transform, Basis, Dimension, PureState};
use crate::seed::stream;
use crate::{Error, Result};

/// A repeatable experiment with a per-trial success predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    /// One fake state `(F|0⟩)^{⊗n}` in an improved run; success when it
    /// escapes sampling and every extracted digit is right.
    Escape {
        n: usize,
        d: Dimension,
        length: usize,
        q: usize,
    },
    /// One correlation-check sample on `(F|r⟩)^{⊗n}` in a random basis.
    ConditionalPass {
        n: usize,
        d: Dimension,
        r: usize,
        model: AnnouncementModel,
    },
    /// One decoy through a full intercept-resend attack; success = flagged.
    EveDetection { d: Dimension },
    /// Honest run with random secrets; success = correct sum.
    Honest {
        protocol: ProtocolKind,
        n: usize,
        d: Dimension,
        length: usize,
        q: usize,
    },
    /// Attack 1 with random secrets; success = undetected, full recovery and
    /// correct sum.
    Attack1 { n: usize, d: Dimension, length: usize },
    /// Fake state conditioned on being sampled and the run completing;
    /// success = `P2`'s guessed digit is right.
    SampledFakeGuess {
        n: usize,
        d: Dimension,
        length: usize,
        q: usize,
        r: usize,
        model: AnnouncementModel,
    },
}

/// Comparison of an oracle against a closed-form constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCheck {
    pub expression: String,
    pub value: ExactProbability,
    pub matches_oracle: bool,
}

/// Result of running a scenario: oracle, estimate and their agreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub id: String,
    pub parameters: Scenario,
    pub oracle: Option<ExactProbability>,
    pub estimate: MonteCarloEstimate,
    pub deviation_sigmas: Option<f64>,
    pub within_3_sigma: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<ReferenceCheck>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<u128>,
}

fn dim(d: usize) -> Dimension {
    Dimension::new(d).expect("default dimensions are valid")
}

impl Scenario {
    pub const NAMES: [&'static str; 6] = [
        "escape",
        "conditional_pass",
        "eve_detection",
        "honest",
        "attack1",
        "sampled_fake_guess",
    ];

    /// Scenario with default parameters `n = 3, d = 2, N = 10, q = 30`.
    pub fn from_name(name: &str) -> Result<Self> {
        let (n, d, length, q) = (3, dim(2), 10, 30);
        Ok(match name {
            "escape" => Scenario::Escape { n, d, length, q },
            "conditional_pass" => Scenario::ConditionalPass {
                n,
                d,
                r: 0,
                model: AnnouncementModel::P1LastAdaptive,
            },
            "eve_detection" => Scenario::EveDetection { d },
            "honest" => Scenario::Honest {
                protocol: ProtocolKind::Improved,
                n,
                d,
                length,
                q,
            },
            "attack1" => Scenario::Attack1 { n, d, length },
            "sampled_fake_guess" => Scenario::SampledFakeGuess {
                n,
                d,
                length,
                q,
                r: 0,
                model: AnnouncementModel::P1LastAdaptive,
            },
            other => return Err(Error::UnknownScenario(other.to_string())),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Scenario::Escape { .. } => "escape",
            Scenario::ConditionalPass { .. } => "conditional_pass",
            Scenario::EveDetection { .. } => "eve_detection",
            Scenario::Honest { .. } => "honest",
            Scenario::Attack1 { .. } => "attack1",
            Scenario::SampledFakeGuess { .. } => "sampled_fake_guess",
        }
    }

    fn config(&self, seed: u64) -> Option<ProtocolConfig> {
        let (n, d, length, q) = match *self {
            Scenario::Escape { n, d, length, q }
            | Scenario::Honest { n, d, length, q, .. }
            | Scenario::SampledFakeGuess { n, d, length, q, .. } => (n, d, length, q),
            Scenario::Attack1 { n, d, length } => (n, d, length, 0),
            _ => return None,
        };
        Some(ProtocolConfig::new(n, d, length).with_samples(q).with_seed(seed))
    }

    /// Checks every parameter before any trial runs.
    pub fn validate(&self) -> Result<()> {
        if let Some(config) = self.config(0) {
            config.validate()?;
        }
        match *self {
            Scenario::SampledFakeGuess { d, r, .. } => d.check_digit(r).map(|_| ()),
            _ => self.oracle().map(|_| ()),
        }
    }

    /// Exact success probability of one trial.
    pub fn oracle(&self) -> Result<ExactProbability> {
        match *self {
            Scenario::Escape { length, q, .. } => escape_probability(length, q),
            Scenario::ConditionalPass { n, d, r, model } => conditional_pass_probability(n, d, r, model),
            Scenario::EveDetection { d } => eve_detection_probability(d),
            Scenario::Honest { .. } | Scenario::Attack1 { .. } => Ok(ExactProbability::ONE),
            Scenario::SampledFakeGuess { d, .. } => ExactProbability::new(1, d.get() as u64),
        }
    }

    /// The closed form `1/2 + 1/(2d)` often quoted for the fake-state pass
    /// probability, compared with the exact oracle.
    pub fn reference(&self) -> Result<Option<ReferenceCheck>> {
        let Scenario::ConditionalPass { d, .. } = *self else {
            return Ok(None);
        };
        let d = d.get() as u64;
        let value = ExactProbability::new(d + 1, 2 * d)?;
        Ok(Some(ReferenceCheck {
            expression: "1/2 + 1/(2d)".into(),
            value,
            matches_oracle: self.oracle()? == value,
        }))
    }

    /// One trial; `None` when the conditioning event did not occur.
    pub fn trial(&self, seed: u64) -> Result<Option<bool>> {
        let config = self.config(seed);
        let secrets = |c: &ProtocolConfig| SecretString::random_set(c.parties, c.length, c.dim, seed);
        match (self, config) {
            (Scenario::Escape { .. }, Some(c)) => {
                let s = secrets(&c);
                let r = fake_state_attack_run(&c, &s, 0, AnnouncementModel::P1LastAdaptive)?;
                Ok(Some(r.report.all_fakes_escaped() && r.completed() && r.report.correct_fraction == Some(1.0)))
            }
            (Scenario::Honest { protocol, .. }, Some(c)) => {
                let s = secrets(&c);
                let r = match protocol {
                    ProtocolKind::Yy2018 => run_yy2018(&c, &s, None, P1Strategy::Honest)?,
                    ProtocolKind::Improved => {
                        run_improved(&c, &s, None, P1Strategy::Honest, AnnouncementModel::P1First)?
                    }
                };
                Ok(Some(r.sum == Some(reference_sum(c.dim, &s))))
            }
            (Scenario::Attack1 { .. }, Some(c)) => {
                let s = secrets(&c);
                let r = attack1_run(&c, &s)?;
                Ok(Some(
                    r.completed()
                        && !r.report.detected
                        && r.report.correct_fraction == Some(1.0)
                        && r.sum == Some(reference_sum(c.dim, &s)),
                ))
            }
            (&Scenario::SampledFakeGuess { r, model, .. }, Some(c)) => {
                let s = secrets(&c);
                let strategy = P1Strategy::FakeState { r, count: 1 };
                let run = run_improved(&c, &s, None, strategy, model)?;
                if run.report.all_fakes_escaped() || !run.completed() {
                    return Ok(None);
                }
                let target = PartyId::from_index(1);
                let guess = run.report.recovered.iter().find(|((p, _), _)| *p == target);
                Ok(guess.map(|(&(_, digit), &g)| s[1].digits[digit] == g))
            }
            (&Scenario::ConditionalPass { n, d, r, model }, _) => {
                let state = PureState::uniform_product(&fourier_transform(d), r, n)?;
                let basis = Basis::random(&mut stream(seed, 2));
                let outcome = correlation_check(
                    &[state],
                    &[0],
                    &[basis],
                    model,
                    &P1Strategy::FakeState { r, count: 1 },
                    &mut stream(seed, 0),
                )?;
                Ok(Some(outcome.error_rate == 0.0))
            }
            (&Scenario::EveDetection { d }, _) => eve_decoy_trial(d, &mut stream(seed, 0)).map(Some),
            _ => unreachable!("protocol scenarios always carry a config"),
        }
    }

    /// Validates, then estimates the success probability over `trials`
    /// seeded trials.
    pub fn run(&self, trials: u64, seed: u64) -> Result<ExperimentRecord> {
        self.validate()?;
        let oracle = self.oracle()?;
        let estimate = monte_carlo(trials, seed, |s| self.trial(s))?;
        let deviation = estimate.deviation(oracle.value());
        Ok(ExperimentRecord {
            id: self.id().to_string(),
            parameters: self.clone(),
            oracle: Some(oracle),
            estimate,
            deviation_sigmas: Some(deviation),
            within_3_sigma: Some(deviation <= 3.0),
            reference: self.reference()?,
            wall_time_ms: None,
        })
    }
}
