use rand::Rng;

use super::SampleCheck;
use crate::adversary::{AnnouncementModel, P1Strategy};
use crate::qudit::{Basis, Dimension, PureState};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationOutcome {
    pub samples: Vec<SampleCheck>,
    /// Fraction of failing samples; 0 when nothing was sampled.
    pub error_rate: f64,
}

/// `P1`'s announcement given her own outcome and everyone else's.
pub(crate) fn p1_announcement(
    dim: Dimension,
    basis: Basis,
    own: usize,
    others: &[usize],
    model: AnnouncementModel,
    strategy: &P1Strategy,
) -> usize {
    if strategy.is_honest() || model == AnnouncementModel::P1First {
        return own;
    }
    match basis {
        Basis::Computational => match others.split_first() {
            Some((first, rest)) if rest.iter().all(|x| x == first) => *first,
            _ => own,
        },
        Basis::Fourier => dim.neg(dim.sum(others.iter().copied())),
    }
}

/// Whether a set of same-basis announcements carries the `|ω⟩` signature:
/// all equal (computational) or summing to 0 mod `d` (Fourier).
pub(crate) fn signature_holds(dim: Dimension, basis: Basis, announced: &[usize]) -> bool {
    match basis {
        Basis::Computational => announced.windows(2).all(|w| w[0] == w[1]),
        Basis::Fourier => dim.sum(announced.iter().copied()) == 0,
    }
}

/// Correlation check on the sampled states.
///
/// For each sampled position all parties measure their component (site `i` is
/// party `P_{i+1}`) in the chosen basis and announce. `P1` announces per the
/// announcement model when dishonest. The sample passes when the announced
/// values carry the `|ω⟩` signature.
pub fn correlation_check<R: Rng + ?Sized>(
    shared: &[PureState],
    positions: &[usize],
    bases: &[Basis],
    model: AnnouncementModel,
    strategy: &P1Strategy,
    rng: &mut R,
) -> Result<CorrelationOutcome> {
    if positions.len() != bases.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            actual: bases.len(),
        });
    }
    if let Some(&position) = positions.iter().find(|&&p| p >= shared.len()) {
        return Err(Error::SampleOutOfRange {
            position,
            states: shared.len(),
        });
    }
    let mut samples = Vec::with_capacity(positions.len());
    for (&position, &basis) in positions.iter().zip(bases) {
        let mut state = shared[position].clone();
        let dim = state.dim();
        let mut outcomes = Vec::with_capacity(state.sites());
        for site in 0..state.sites() {
            let (rec, collapsed) = state.measure_site(site, basis, rng)?;
            state = collapsed;
            outcomes.push(rec.outcome);
        }
        let mut announced = outcomes.clone();
        announced[0] = p1_announcement(dim, basis, outcomes[0], &outcomes[1..], model, strategy);
        samples.push(SampleCheck {
            position,
            basis,
            passed: signature_holds(dim, basis, &announced),
            announced,
        });
    }
    let failures = samples.iter().filter(|s| !s.passed).count();
    let error_rate = if samples.is_empty() {
        0.0
    } else {
        failures as f64 / samples.len() as f64
    };
    Ok(CorrelationOutcome {
        samples,
        error_rate,
    })
}
