//! Scenario files.
//!
//! A scenario is a TOML (or JSON, by extension) document:
//!
//! ```toml
//! name = "fake-state"
//! protocol = "improved"          # yy2018 | improved
//! n = 3
//! d = 2
//! length = 10                    # N, digits per secret
//! q = 30
//! secrets = "random"             # or [[1, 0, ...], [0, 1, ...], ...]
//! announcement_model = "p1_last_adaptive"
//! trials = 1000
//! seed = 7
//! output = "fake-state.jsonl"
//!
//! [attack]
//! kind = "fake_state"            # honest | attack1 | attack2 | fake_state | intercept_resend
//! r = 0
//! count = 1
//! ```

use std::path::{Path, PathBuf};

use qsum_core::adversary::{AnnouncementModel, AttackStrategy};
use qsum_core::protocol::{PartyId, ProtocolConfig, ProtocolKind, SecretString, DEFAULT_DECOYS_PER_CHANNEL};
use qsum_core::qudit::Dimension;
use qsum_core::seed::derive_seed;
use qsum_core::Violation;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomKeyword {
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SecretsSpec {
    Random(RandomKeyword),
    Explicit(Vec<Vec<usize>>),
}

impl Default for SecretsSpec {
    fn default() -> Self {
        SecretsSpec::Random(RandomKeyword::Random)
    }
}

fn default_protocol() -> ProtocolKind {
    ProtocolKind::Improved
}
fn default_n() -> usize {
    3
}
fn default_d() -> usize {
    2
}
fn default_length() -> usize {
    10
}
fn default_q() -> usize {
    30
}
fn default_decoys() -> usize {
    DEFAULT_DECOYS_PER_CHANNEL
}
fn default_trials() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_protocol")]
    pub protocol: ProtocolKind,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_length", alias = "N")]
    pub length: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_decoys")]
    pub decoys_per_channel: usize,
    #[serde(default)]
    pub channel_error_threshold: f64,
    #[serde(default)]
    pub correlation_error_threshold: f64,
    #[serde(default)]
    pub secrets: SecretsSpec,
    #[serde(default)]
    pub attack: AttackStrategy,
    #[serde(default)]
    pub announcement_model: AnnouncementModel,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ScenarioFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if json {
            serde_json::from_str(text).map_err(|e| e.to_string())
        } else {
            toml::from_str(text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| CliError::Parse {
            path: path.to_path_buf(),
            message: message.trim_end().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Protocol configuration for run `run_id`, whose seed is derived from
    /// the scenario seed.
    pub fn config(&self, dim: Dimension, run_seed: u64) -> ProtocolConfig {
        ProtocolConfig {
            parties: self.n,
            dim,
            length: self.length,
            samples: if self.protocol == ProtocolKind::Improved { self.q } else { 0 },
            decoys_per_channel: self.decoys_per_channel,
            channel_error_threshold: self.channel_error_threshold,
            correlation_error_threshold: self.correlation_error_threshold,
            seed: run_seed,
        }
    }

    pub fn run_seed(&self, run_id: u64) -> u64 {
        derive_seed(self.seed, run_id)
    }

    /// Every violated bound, collected before any simulation work.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &str, reason: String| {
            out.push(Violation {
                field: field.to_string(),
                reason,
            })
        };
        let dim = match Dimension::new(self.d) {
            Ok(d) => Some(d),
            Err(e) => {
                push("d", e.to_string());
                None
            }
        };
        if self.trials == 0 {
            push("trials", "need at least one trial".into());
        }
        let Some(dim) = dim else {
            return out;
        };
        out.extend(self.config(dim, 0).violations());
        let mut push = |field: &str, reason: String| {
            out.push(Violation {
                field: field.to_string(),
                reason,
            })
        };
        if let SecretsSpec::Explicit(lists) = &self.secrets {
            if lists.len() != self.n {
                push("secrets", format!("expected {} strings, got {}", self.n, lists.len()));
            }
            for (i, list) in lists.iter().enumerate() {
                if list.len() != self.length {
                    push("secrets", format!("P{} has {} digits, expected {}", i + 1, list.len(), self.length));
                }
                if let Some(bad) = list.iter().find(|&&x| x >= self.d) {
                    push("secrets", format!("P{} digit {bad} is not below d = {}", i + 1, self.d));
                }
            }
        }
        match (self.attack, self.protocol) {
            (AttackStrategy::Attack1 | AttackStrategy::Attack2 { .. }, ProtocolKind::Improved) => push(
                "attack.kind",
                "attack1 and attack2 target the yy2018 protocol".into(),
            ),
            (AttackStrategy::FakeState { .. }, ProtocolKind::Yy2018) => {
                push("attack.kind", "fake_state targets the improved protocol".into())
            }
            _ => {}
        }
        match self.attack {
            AttackStrategy::Attack2 { party, digit } => {
                if party == PartyId::PREPARER || party.index() >= self.n {
                    push("attack.party", format!("target must be one of P2..P{}, got {party}", self.n));
                }
                if digit >= self.length {
                    push("attack.digit", format!("digit index {digit} is not below N = {}", self.length));
                }
            }
            AttackStrategy::FakeState { r, count } => {
                if r >= self.d {
                    push("attack.r", format!("{r} is not below d = {}", self.d));
                }
                let total = self.length + self.q;
                if count == 0 || count > total {
                    push("attack.count", format!("must lie in 1..={total}, got {count}"));
                }
            }
            AttackStrategy::InterceptResend { fraction } if !(0.0..=1.0).contains(&fraction) => {
                push("attack.fraction", format!("must lie in [0, 1], got {fraction}"))
            }
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<Dimension> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(CliError::Invalid(v));
        }
        Ok(Dimension::new(self.d)?)
    }

    /// Secrets for one run: the explicit lists, or fresh ones from the run
    /// seed.
    pub fn secrets_for(&self, dim: Dimension, run_seed: u64) -> Result<Vec<SecretString>> {
        Ok(match &self.secrets {
            SecretsSpec::Explicit(lists) => SecretString::from_lists(lists, dim)?,
            SecretsSpec::Random(_) => SecretString::random_set(self.n, self.length, dim, run_seed),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ScenarioFile {
        ScenarioFile::parse(text, Path::new("s.toml")).unwrap()
    }

    #[test]
    fn defaults_follow_attack_regime() {
        let s = parse("");
        assert_eq!((s.n, s.d, s.length, s.q), (3, 2, 10, 30));
        assert_eq!(s.secrets, SecretsSpec::default());
        assert!(s.violations().is_empty());
    }

    #[test]
    fn parses_attack_table_and_lists() {
        let s = parse(
            r#"
            protocol = "yy2018"
            n = 3
            d = 5
            N = 2
            secrets = [[1, 2], [3, 4], [0, 0]]
            [attack]
            kind = "attack2"
            party = 2
            digit = 1
            "#,
        );
        assert_eq!(s.length, 2);
        assert_eq!(s.secrets, SecretsSpec::Explicit(vec![vec![1, 2], vec![3, 4], vec![0, 0]]));
        assert_eq!(s.attack, AttackStrategy::Attack2 { party: PartyId::new(2).unwrap(), digit: 1 });
        assert!(s.violations().is_empty());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = ScenarioFile::parse("n = 3\nd = \"five\"\n", Path::new("bad.toml")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.toml") && msg.contains("line 2") && msg.contains('d'), "{msg}");
        assert!(ScenarioFile::parse("colour = 1", Path::new("x.toml")).is_err());
    }

    #[test]
    fn collects_all_violations() {
        let s = parse(
            r#"
            n = 2
            d = 3
            length = 0
            trials = 0
            secrets = [[5]]
            channel_error_threshold = 2.0
            [attack]
            kind = "fake_state"
            r = 3
            count = 0
            "#,
        );
        let fields: Vec<String> = s.violations().into_iter().map(|v| v.field).collect();
        for f in ["trials", "n", "length", "channel_error_threshold", "secrets", "attack.r", "attack.count"] {
            assert!(fields.iter().any(|x| x == f), "missing {f} in {fields:?}");
        }
    }

    #[test]
    fn size_guard_is_a_violation() {
        let s = parse("n = 12\nd = 5\n");
        assert!(s.violations().iter().any(|v| v.reason.contains("limit")));
        let s = parse("d = 1\n");
        assert_eq!(s.violations()[0].field, "d");
    }

    #[test]
    fn attack_protocol_mismatch() {
        let s = parse("protocol = \"improved\"\n[attack]\nkind = \"attack1\"\n");
        assert_eq!(s.violations()[0].field, "attack.kind");
    }

    #[test]
    fn json_scenarios() {
        let s = ScenarioFile::parse(r#"{"n": 4, "d": 3, "attack": {"kind": "attack1"}, "protocol": "yy2018"}"#, Path::new("s.json")).unwrap();
        assert_eq!(s.n, 4);
        assert!(s.violations().is_empty());
    }
}
