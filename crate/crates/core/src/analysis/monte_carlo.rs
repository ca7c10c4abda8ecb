use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::derive_seed;
use crate::{Error, Result};

/// Bernoulli estimate from independent seeded trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    /// Trials that produced an outcome.
    pub trials: u64,
    pub successes: u64,
    /// Trials whose predicate did not apply (conditioning events).
    pub skipped: u64,
    pub point: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_counts(trials: u64, successes: u64, skipped: u64, seed: u64) -> Result<Self> {
        if trials == 0 || successes > trials {
            return Err(Error::InvalidConfig {
                field: "trials",
                reason: format!("{successes} successes in {trials} counted trials"),
            });
        }
        let point = successes as f64 / trials as f64;
        Ok(MonteCarloEstimate {
            trials,
            successes,
            skipped,
            point,
            stderr: (point * (1.0 - point) / trials as f64).sqrt(),
            seed,
        })
    }

    /// Distance from `reference` in standard errors. A zero standard error
    /// gives 0 on exact agreement and infinity otherwise.
    pub fn deviation(&self, reference: f64) -> f64 {
        let gap = (self.point - reference).abs();
        if self.stderr > 0.0 {
            gap / self.stderr
        } else if gap < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, reference: f64, sigmas: f64) -> bool {
        self.deviation(reference) <= sigmas
    }
}

/// Runs `trials` trials in parallel; trial `i` receives
/// `derive_seed(seed, i)`. `Ok(None)` marks a trial as skipped.
///
/// Counts are summed, so the result does not depend on scheduling.
pub fn monte_carlo<F>(trials: u64, seed: u64, trial: F) -> Result<MonteCarloEstimate>
where
    F: Fn(u64) -> Result<Option<bool>> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidConfig {
            field: "trials",
            reason: "need at least one trial".into(),
        });
    }
    let (successes, skipped) = (0..trials)
        .into_par_iter()
        .map(|i| {
            trial(derive_seed(seed, i)).map(|o| match o {
                Some(true) => (1u64, 0u64),
                Some(false) => (0, 0),
                None => (0, 1),
            })
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    MonteCarloEstimate::from_counts(trials - skipped, successes, skipped, seed)
}
