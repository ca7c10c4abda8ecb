//! Batch execution of a scenario and its JSONL report.
//!
//! One `run` record per trial in run-id order, then one `aggregate` record
//! echoing the scenario without its output path. Reports carry no timing, so
//! a rerun with the same seed is byte-identical.

use std::path::Path;

use qsum_core::adversary::{AdversaryReport, AttackStrategy, P1Strategy};
use qsum_core::analysis::{channel_detection_probability, ExactProbability, MonteCarloEstimate, ReferenceCheck};
use qsum_core::protocol::{reference_sum, run_improved, run_yy2018, ProtocolKind, Verdict};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::scenario::{ScenarioFile, SCHEMA_VERSION};
use oracles::{escape_oracles, rate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub seed: u64,
    pub verdict: Verdict,
    /// Completed with the true sum.
    pub correct: bool,
    pub detected: bool,
    /// All fake states avoided the sample; absent without fake states.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub escaped: Option<bool>,
    /// Attack goal met: undetected, completed and every extracted digit right.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub attack_success: Option<bool>,
    pub report: AdversaryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub quantity: String,
    pub oracle: ExactProbability,
    pub estimate: MonteCarloEstimate,
    pub deviation_sigmas: f64,
    pub within_3_sigma: bool,
    pub within_5_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub schema_version: u32,
    pub scenario: ScenarioFile,
    pub runs: u64,
    pub completed: u64,
    pub success_rate: f64,
    pub detection_rate: f64,
    /// Mean recovered-digit accuracy over runs that recovered anything.
    pub recovered_accuracy: Option<f64>,
    pub escape_rate: Option<f64>,
    pub attack_success_rate: Option<f64>,
    pub comparisons: Vec<OracleComparison>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub reference_checks: Vec<ReferenceCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ReportLine {
    Run(RunRecord),
    Aggregate(AggregateRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub runs: Vec<RunRecord>,
    pub aggregate: AggregateRecord,
}

impl Report {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for run in &self.runs {
            out.push_str(&serde_json::to_string(&ReportLine::Run(run.clone())).expect("run records serialize"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&ReportLine::Aggregate(self.aggregate.clone())).expect("aggregate serializes"));
        out.push('\n');
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Parses a report written by [`Report::to_jsonl`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut runs = Vec::new();
        let mut aggregate = None;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parsed: ReportLine = serde_json::from_str(line).map_err(|e| CliError::Parse {
                path: "report".into(),
                message: format!("line {}: {e}", i + 1),
            })?;
            match parsed {
                ReportLine::Run(r) => runs.push(r),
                ReportLine::Aggregate(a) => aggregate = Some(a),
            }
        }
        let aggregate = aggregate.ok_or_else(|| CliError::Parse {
            path: "report".into(),
            message: "no aggregate record".into(),
        })?;
        Ok(Report { runs, aggregate })
    }
}

fn run_one(scenario: &ScenarioFile, dim: qsum_core::qudit::Dimension, run_id: u64) -> Result<RunRecord> {
    let seed = scenario.run_seed(run_id);
    let config = scenario.config(dim, seed);
    let secrets = scenario.secrets_for(dim, seed)?;
    let (strategy, eve) = scenario.attack.split()?;
    let mut result = match scenario.protocol {
        ProtocolKind::Yy2018 => run_yy2018(&config, &secrets, eve.as_ref(), strategy)?,
        ProtocolKind::Improved => run_improved(&config, &secrets, eve.as_ref(), strategy, scenario.announcement_model)?,
    };
    result.report.score(&secrets);
    let report = result.report;
    let correct = result.sum.as_ref() == Some(&reference_sum(dim, &secrets));
    let completed = result.transcript.verdict.is_completed();
    let fake = matches!(strategy, P1Strategy::FakeState { .. });
    let escaped = fake.then(|| report.all_fakes_escaped());
    let attack_success = (!strategy.is_honest()).then(|| {
        completed
            && !report.detected
            && report.correct_fraction == Some(1.0)
            && escaped.unwrap_or(true)
    });
    Ok(RunRecord {
        run_id,
        seed,
        verdict: result.transcript.verdict,
        correct,
        detected: report.detected,
        escaped,
        attack_success,
        report,
    })
}

/// Validates the scenario, then executes all trials.
pub fn run_scenario(scenario: &ScenarioFile) -> Result<Report> {
    let dim = scenario.validate()?;
    let runs: Vec<RunRecord> = (0..scenario.trials)
        .into_par_iter()
        .map(|i| run_one(scenario, dim, i))
        .collect::<Result<_>>()?;
    let aggregate = aggregate(scenario, dim, &runs)?;
    Ok(Report { runs, aggregate })
}

fn aggregate(scenario: &ScenarioFile, dim: qsum_core::qudit::Dimension, runs: &[RunRecord]) -> Result<AggregateRecord> {
    let n = runs.len() as u64;
    let count = |f: &dyn Fn(&RunRecord) -> bool| runs.iter().filter(|r| f(r)).count() as u64;
    let completed = count(&|r| r.verdict.is_completed());
    let correct = count(&|r| r.correct);
    let detected = count(&|r| r.detected);
    let accuracies: Vec<f64> = runs.iter().filter_map(|r| r.report.correct_fraction).collect();
    let recovered_accuracy =
        (!accuracies.is_empty()).then(|| accuracies.iter().sum::<f64>() / accuracies.len() as f64);
    let escapes = runs.iter().filter_map(|r| r.escaped).collect::<Vec<_>>();
    let escape_count = escapes.iter().filter(|&&e| e).count() as u64;
    let attack_count = count(&|r| r.attack_success == Some(true));
    let attacked = runs.iter().any(|r| r.attack_success.is_some());

    let mut comparisons = Vec::new();
    let mut compare = |quantity: &str, oracle: ExactProbability, successes: u64| -> Result<()> {
        let estimate = MonteCarloEstimate::from_counts(n, successes, 0, scenario.seed)?;
        let deviation = estimate.deviation(oracle.value());
        comparisons.push(OracleComparison {
            quantity: quantity.to_string(),
            oracle,
            estimate,
            deviation_sigmas: deviation,
            within_3_sigma: deviation <= 3.0,
            within_5_sigma: deviation <= 5.0,
        });
        Ok(())
    };
    let mut reference_checks = Vec::new();
    match scenario.attack {
        AttackStrategy::Honest => compare("success_rate", ExactProbability::ONE, correct)?,
        AttackStrategy::Attack1 | AttackStrategy::Attack2 { .. } => {
            compare("attack_success_rate", ExactProbability::ONE, attack_count)?;
            compare("success_rate", ExactProbability::ONE, correct)?;
        }
        AttackStrategy::FakeState { r, count: fakes } => {
            let oracles = escape_oracles(scenario, dim, r, fakes)?;
            compare("escape_rate", oracles.escape, escape_count)?;
            if let Some(success) = oracles.attack_success {
                compare("attack_success_rate", success, attack_count)?;
            }
            if let Some(detection) = oracles.detection {
                compare("detection_rate", detection, detected)?;
            }
            reference_checks.extend(oracles.reference);
        }
        AttackStrategy::InterceptResend { fraction } => {
            if fraction == 1.0 {
                let decoys = (scenario.n - 1) * scenario.decoys_per_channel;
                if scenario.channel_error_threshold == 0.0 {
                    if let Ok(p) = channel_detection_probability(dim, decoys) {
                        let channel = count(&|r| matches!(r.verdict, Verdict::AbortedChannel { .. }));
                        compare("channel_abort_rate", p, channel)?;
                    }
                }
            }
        }
    }

    let echo = ScenarioFile {
        output: None,
        ..scenario.clone()
    };
    Ok(AggregateRecord {
        schema_version: SCHEMA_VERSION,
        scenario: echo,
        runs: n,
        completed,
        success_rate: rate(correct, n),
        detection_rate: rate(detected, n),
        recovered_accuracy,
        escape_rate: (!escapes.is_empty()).then(|| rate(escape_count, n)),
        attack_success_rate: attacked.then(|| rate(attack_count, n)),
        comparisons,
        reference_checks,
    })
}

mod oracles {
    use qsum_core::analysis::{
        conditional_pass_probability, escape_probability, multi_fake_escape_probability, ExactProbability,
        ReferenceCheck, Scenario,
    };
    use qsum_core::qudit::Dimension;

    use super::Result;
    use crate::scenario::ScenarioFile;

    pub fn rate(k: u64, n: u64) -> f64 {
        if n == 0 {
            0.0
        } else {
            k as f64 / n as f64
        }
    }

    pub struct FakeOracles {
        pub escape: ExactProbability,
        pub attack_success: Option<ExactProbability>,
        pub detection: Option<ExactProbability>,
        pub reference: Option<ReferenceCheck>,
    }

    pub fn escape_oracles(s: &ScenarioFile, dim: Dimension, r: usize, count: usize) -> Result<FakeOracles> {
        let escape = multi_fake_escape_probability(s.length, s.q, count)?;
        if count != 1 {
            return Ok(FakeOracles {
                escape,
                attack_success: None,
                detection: None,
                reference: None,
            });
        }
        let single = escape_probability(s.length, s.q)?;
        let pass_scenario = Scenario::ConditionalPass {
            n: s.n,
            d: dim,
            r,
            model: s.announcement_model,
        };
        let pass = conditional_pass_probability(s.n, dim, r, s.announcement_model)?;
        // Detected only when sampled and failing the single-sample check.
        let detection = (s.correlation_error_threshold == 0.0).then(|| {
            let sampled = ExactProbability::ONE.ratio() - single.ratio();
            let fail = ExactProbability::ONE.ratio() - pass.ratio();
            let p = sampled * fail;
            ExactProbability::new(*p.numer(), *p.denom())
        });
        Ok(FakeOracles {
            escape,
            attack_success: Some(single),
            detection: detection.transpose()?,
            reference: pass_scenario.reference()?,
        })
    }
}
