use std::fmt;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adversary::{AnnouncementModel, P1Strategy};
use crate::protocol::correlation::{p1_announcement, signature_holds};
use crate::qudit::{fourier_transform, Basis, Dimension, PureState};
use crate::{Error, Result};

/// A probability held as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProbability(Ratio<u64>);

impl ExactProbability {
    pub const ZERO: Self = ExactProbability(Ratio::new_raw(0, 1));
    pub const ONE: Self = ExactProbability(Ratio::new_raw(1, 1));

    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 || numerator > denominator {
            return Err(Error::InvalidConfig {
                field: "probability",
                reason: format!("{numerator}/{denominator} is not a probability"),
            });
        }
        Ok(ExactProbability(Ratio::new(numerator, denominator)))
    }

    fn from_ratio(r: Ratio<u64>) -> Result<Self> {
        Self::new(*r.numer(), *r.denom())
    }

    pub fn numerator(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> u64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn value(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

#[derive(Serialize, Deserialize)]
struct Repr {
    numerator: u64,
    denominator: u64,
    value: f64,
}

impl Serialize for ExactProbability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Repr {
            numerator: self.numerator(),
            denominator: self.denominator(),
            value: self.value(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactProbability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = Repr::deserialize(d)?;
        ExactProbability::new(r.numerator, r.denominator).map_err(serde::de::Error::custom)
    }
}

/// Nearest fraction with the given denominator, rejected if it misses `p` by
/// more than `1e-9`.
fn snap(p: f64, denominator: u64) -> Result<Ratio<u64>> {
    let k = (p * denominator as f64).round();
    if !(0.0..=denominator as f64).contains(&k) || (p - k / denominator as f64).abs() > 1e-9 {
        return Err(Error::NotRational(p));
    }
    Ok(Ratio::new(k as u64, denominator))
}

/// Probability that one fake state among `N + q` avoids a uniformly random
/// sample of size `q`: `N/(N+q)`.
pub fn escape_probability(retained: usize, samples: usize) -> Result<ExactProbability> {
    if retained == 0 {
        return Err(Error::InvalidConfig {
            field: "length",
            reason: "N must be at least 1".into(),
        });
    }
    ExactProbability::new(retained as u64, (retained + samples) as u64)
}

/// `C(N+q−1, q) / C(N+q, q)` evaluated with big integers.
pub fn escape_probability_binomial(retained: usize, samples: usize) -> Result<ExactProbability> {
    multi_fake_escape_probability(retained, samples, 1)
}

/// Probability that all `count` fake states avoid the sample:
/// `C(N+q−c, q) / C(N+q, q)`.
pub fn multi_fake_escape_probability(retained: usize, samples: usize, count: usize) -> Result<ExactProbability> {
    let total = retained + samples;
    if retained == 0 || count > total {
        return Err(Error::InvalidConfig {
            field: "count",
            reason: format!("need N ≥ 1 and count ≤ N + q, got N = {retained}, q = {samples}, count = {count}"),
        });
    }
    let num = binomial(BigUint::from(total - count), BigUint::from(samples));
    let den = binomial(BigUint::from(total), BigUint::from(samples));
    let r = BigRational::new(num.into(), den.into());
    match (r.numer().to_u64(), r.denom().to_u64()) {
        (Some(n), Some(d)) => ExactProbability::new(n, d),
        _ => Err(Error::InvalidConfig {
            field: "count",
            reason: "reduced fraction exceeds 64 bits".into(),
        }),
    }
}

/// Exact probability that the fake state `(F|r⟩)^{⊗n}` passes one sample of
/// the correlation check, each basis chosen with probability 1/2 and `P1`
/// announcing per `model`.
pub fn conditional_pass_probability(
    n: usize,
    dim: Dimension,
    r: usize,
    model: AnnouncementModel,
) -> Result<ExactProbability> {
    if n < 3 {
        return Err(Error::InvalidConfig {
            field: "n",
            reason: format!("need at least 3 parties, got {n}"),
        });
    }
    dim.check_digit(r)?;
    let state = PureState::uniform_product(&fourier_transform(dim), r, n)?;
    let denominator = (dim.get() as u64).pow(n as u32);
    let strategy = P1Strategy::FakeState { r, count: 1 };
    let mut pass = Ratio::<u64>::zero();
    for basis in Basis::ALL {
        for (outcome, p) in state.outcome_distribution(&vec![basis; n])? {
            let mut announced = outcome.clone();
            announced[0] = p1_announcement(dim, basis, outcome[0], &outcome[1..], model, &strategy);
            if signature_holds(dim, basis, &announced) {
                pass += snap(p, denominator)?;
            }
        }
    }
    ExactProbability::from_ratio(pass / 2)
}

fn eigenstate(dim: Dimension, basis: Basis, value: usize) -> Result<PureState> {
    let state = PureState::basis(dim, &[value])?;
    match basis {
        Basis::Computational => Ok(state),
        Basis::Fourier => state.apply_single(0, &fourier_transform(dim)),
    }
}

/// Per-decoy detection probability of a full intercept-resend attack,
/// enumerated over decoy basis and value, Eve's basis and outcome, and the
/// receiver's outcome.
pub fn eve_detection_probability(dim: Dimension) -> Result<ExactProbability> {
    let d = dim.get() as u64;
    let mut detected = Ratio::<u64>::zero();
    for decoy_basis in Basis::ALL {
        for value in 0..dim.get() {
            let decoy = eigenstate(dim, decoy_basis, value)?;
            for eve_basis in Basis::ALL {
                for (seen, pe) in decoy.site_probabilities(0, eve_basis)?.into_iter().enumerate() {
                    let pe = snap(pe, d)?;
                    if pe.is_zero() {
                        continue;
                    }
                    let resent = eigenstate(dim, eve_basis, seen)?;
                    for (got, pr) in resent.site_probabilities(0, decoy_basis)?.into_iter().enumerate() {
                        if got != value {
                            detected += pe * snap(pr, d)?;
                        }
                    }
                }
            }
        }
    }
    ExactProbability::from_ratio(detected / (4 * d))
}

/// Probability that at least one of `decoys` independent decoys flags a full
/// intercept-resend attack: `1 − (1 − p)^decoys` with `p` the per-decoy value.
pub fn channel_detection_probability(dim: Dimension, decoys: usize) -> Result<ExactProbability> {
    let miss = ExactProbability::ONE.ratio() - eve_detection_probability(dim)?.ratio();
    let big = |x: u64| num_bigint::BigInt::from(x);
    let miss = BigRational::new(big(*miss.numer()), big(*miss.denom()));
    let hit = BigRational::from_integer(big(1)) - num_traits::pow(miss, decoys);
    match (hit.numer().to_u64(), hit.denom().to_u64()) {
        (Some(n), Some(d)) => ExactProbability::new(n, d),
        _ => Err(Error::InvalidConfig {
            field: "decoys_per_channel",
            reason: format!("exact detection probability for {decoys} decoys exceeds 64-bit fractions"),
        }),
    }
}
