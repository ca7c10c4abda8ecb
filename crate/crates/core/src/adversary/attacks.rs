use serde::{Deserialize, Serialize};

use super::{AnnouncementModel, P1Strategy};
use crate::protocol::{run_improved, run_yy2018, PartyId, ProtocolConfig, RoundResult, SecretString};
use crate::qudit::{fourier_transform, omega_state, shift_operator, Basis, Dimension};
use crate::Result;

/// Attack 1 inside a YY2018 run, scored against the true secrets.
pub fn attack1_run(config: &ProtocolConfig, secrets: &[SecretString]) -> Result<RoundResult> {
    let mut result = run_yy2018(config, secrets, None, P1Strategy::Attack1)?;
    result.report.score(secrets);
    Ok(result)
}

/// Attack 2 against digit `digit` of `party` inside a YY2018 run.
pub fn attack2_run(config: &ProtocolConfig, secrets: &[SecretString], party: PartyId, digit: usize) -> Result<RoundResult> {
    let mut result = run_yy2018(config, secrets, None, P1Strategy::Attack2 { party, digit })?;
    result.report.score(secrets);
    Ok(result)
}

/// A single fake state `(F|r⟩)^{⊗n}` hidden in an improved-protocol run.
pub fn fake_state_attack_run(
    config: &ProtocolConfig,
    secrets: &[SecretString],
    r: usize,
    model: AnnouncementModel,
) -> Result<RoundResult> {
    let mut result = run_improved(config, secrets, None, P1Strategy::FakeState { r, count: 1 }, model)?;
    result.report.score(secrets);
    Ok(result)
}

/// Exhaustive check of the Attack 2 extraction identity for one digit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attack2Check {
    pub digit: usize,
    /// Joint outcomes `(l_1 ⊕ k, l_2, …, l_n)` with non-zero probability.
    pub support: Vec<Vec<usize>>,
    /// Whether `announced ⊕ l_2 ⊕ … ⊕ l_n == k` on every support point.
    pub all_correct: bool,
    pub total_probability: f64,
}

/// Enumerates the exact joint distribution after the target encodes `k` on
/// component 1 of `d^{-1/2} Σ_r |r⟩ F|r⟩ … F|r⟩` and verifies the extraction
/// on every outcome.
pub fn attack2_support_check(n: usize, dim: Dimension, k: usize) -> Result<Attack2Check> {
    dim.check_digit(k)?;
    let f = fourier_transform(dim);
    let mut state = omega_state(n, dim)?;
    for site in 1..n {
        state.apply_in_place(site, &f)?;
    }
    state.apply_in_place(0, &(&shift_operator(k, dim)? * &f))?;
    let dist = state.outcome_distribution(&vec![Basis::Computational; n])?;
    let all_correct = dist.keys().all(|o| dim.sum(o.iter().copied()) == k);
    Ok(Attack2Check {
        digit: k,
        total_probability: dist.values().sum(),
        support: dist.into_keys().collect(),
        all_correct,
    })
}
