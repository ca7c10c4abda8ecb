use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;

use super::{fourier_transform, Amplitude, Basis, Dimension, MeasurementRecord, SingleQuditUnitary, TOLERANCE};
use crate::{Error, Result};

/// Upper bound on the number of stored amplitudes (`d^m`).
pub const MAX_AMPLITUDES: usize = 1 << 22;

/// Joint outcome distribution: digit tuple (one digit per site) to probability.
/// Only outcomes with probability above `1e-12` are present.
pub type Distribution = BTreeMap<Vec<usize>, f64>;

const SUPPORT_CUTOFF: f64 = 1e-12;

/// A normalized pure state of `sites` qudits of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim: Dimension,
    sites: usize,
    amps: Vec<Amplitude>,
}

fn checked_size(dim: Dimension, sites: usize) -> Result<usize> {
    let amplitudes = (dim.get() as u128).checked_pow(sites as u32).unwrap_or(u128::MAX);
    if amplitudes > MAX_AMPLITUDES as u128 {
        return Err(Error::SizeGuard {
            amplitudes,
            limit: MAX_AMPLITUDES,
        });
    }
    Ok(amplitudes as usize)
}

/// `d^{-1/2} Σ_r |r⟩^{⊗n}`, the shared resource of the summation protocols.
pub fn omega_state(n: usize, dim: Dimension) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidConfig {
            field: "n",
            reason: format!("the entangled state needs at least 2 components, got {n}"),
        });
    }
    let len = checked_size(dim, n)?;
    let d = dim.get();
    // index of |r r ... r⟩ is r * (1 + d + d^2 + ...)
    let repunit = (0..n).fold(0usize, |acc, _| acc * d + 1);
    let mut amps = vec![Amplitude::new(0.0, 0.0); len];
    let a = 1.0 / (d as f64).sqrt();
    for r in 0..d {
        amps[r * repunit] = Amplitude::new(a, 0.0);
    }
    Ok(PureState { dim, sites: n, amps })
}

impl PureState {
    pub fn from_amplitudes(dim: Dimension, sites: usize, amps: Vec<Amplitude>) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidConfig {
                field: "sites",
                reason: "a state needs at least one site".into(),
            });
        }
        let len = checked_size(dim, sites)?;
        if amps.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let state = PureState { dim, sites, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Computational basis state `|digits[0] digits[1] ...⟩`.
    pub fn basis(dim: Dimension, digits: &[usize]) -> Result<Self> {
        let len = checked_size(dim, digits.len())?;
        let index = index_of(dim, digits)?;
        let mut amps = vec![Amplitude::new(0.0, 0.0); len];
        amps[index] = Amplitude::new(1.0, 0.0);
        PureState::from_amplitudes(dim, digits.len(), amps)
    }

    /// Tensor product of single-qudit vectors, site 0 first.
    pub fn product(dim: Dimension, factors: &[Vec<Amplitude>]) -> Result<Self> {
        checked_size(dim, factors.len())?;
        let mut amps = vec![Amplitude::new(1.0, 0.0)];
        for factor in factors {
            if factor.len() != dim.get() {
                return Err(Error::LengthMismatch {
                    expected: dim.get(),
                    actual: factor.len(),
                });
            }
            amps = amps
                .iter()
                .flat_map(|a| factor.iter().map(move |f| a * f))
                .collect();
        }
        PureState::from_amplitudes(dim, factors.len(), amps)
    }

    /// Product state `(op|value⟩)^{⊗sites}`.
    pub fn uniform_product(op: &SingleQuditUnitary, value: usize, sites: usize) -> Result<Self> {
        let dim = op.dim();
        dim.check_digit(value)?;
        let column = op.column(value);
        PureState::product(dim, &vec![column; sites])
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<Amplitude> {
        if digits.len() != self.sites {
            return Err(Error::LengthMismatch {
                expected: self.sites,
                actual: digits.len(),
            });
        }
        Ok(self.amps[index_of(self.dim, digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Base-`d` digits of a basis index, site 0 first.
    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let d = self.dim.get();
        let mut digits = vec![0; self.sites];
        for slot in digits.iter_mut().rev() {
            *slot = index % d;
            index /= d;
        }
        digits
    }

    fn stride(&self, site: usize) -> usize {
        self.dim.get().pow((self.sites - 1 - site) as u32)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.sites {
            return Err(Error::SiteOutOfRange {
                site,
                sites: self.sites,
            });
        }
        Ok(())
    }

    /// Applies `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on `site`.
    pub fn apply_single(&self, site: usize, op: &SingleQuditUnitary) -> Result<Self> {
        let mut out = self.clone();
        out.apply_in_place(site, op)?;
        Ok(out)
    }

    pub fn apply_in_place(&mut self, site: usize, op: &SingleQuditUnitary) -> Result<()> {
        self.check_site(site)?;
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                actual: op.dim().get(),
            });
        }
        let d = self.dim.get();
        let stride = self.stride(site);
        let block = stride * d;
        let mut column = vec![Amplitude::new(0.0, 0.0); d];
        for base in (0..self.amps.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (k, c) in column.iter_mut().enumerate() {
                    *c = self.amps[start + k * stride];
                }
                for row in 0..d {
                    self.amps[start + row * stride] =
                        (0..d).map(|k| op.entry(row, k) * column[k]).sum();
                }
            }
        }
        Ok(())
    }

    /// Rotates `site` so that a computational readout realizes `basis`.
    fn rotated_into(&self, site: usize, basis: Basis) -> Result<PureState> {
        match basis {
            Basis::Computational => Ok(self.clone()),
            Basis::Fourier => self.apply_single(site, &fourier_transform(self.dim).adjoint()),
        }
    }

    /// Outcome probabilities of measuring `site` in `basis`.
    pub fn site_probabilities(&self, site: usize, basis: Basis) -> Result<Vec<f64>> {
        self.check_site(site)?;
        let rotated = self.rotated_into(site, basis)?;
        Ok(rotated.computational_site_probabilities(site))
    }

    fn computational_site_probabilities(&self, site: usize) -> Vec<f64> {
        let d = self.dim.get();
        let stride = self.stride(site);
        let mut probs = vec![0.0; d];
        for (i, a) in self.amps.iter().enumerate() {
            probs[(i / stride) % d] += a.norm_sqr();
        }
        probs
    }

    /// Projects `site` onto computational outcome `outcome` and renormalizes.
    fn collapse_computational(&mut self, site: usize, outcome: usize, prob: f64) -> Result<()> {
        if prob <= SUPPORT_CUTOFF {
            return Err(Error::ZeroProbability);
        }
        let d = self.dim.get();
        let stride = self.stride(site);
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i / stride) % d == outcome {
                *a *= scale;
            } else {
                *a = Amplitude::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    /// Projective measurement of one site.
    ///
    /// Returns the outcome and the renormalized post-measurement state. In the
    /// Fourier basis the collapsed site is left in `F|l⟩`.
    pub fn measure_site<R: Rng + ?Sized>(
        &self,
        site: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<(MeasurementRecord, PureState)> {
        self.check_site(site)?;
        let mut rotated = self.rotated_into(site, basis)?;
        let probs = rotated.computational_site_probabilities(site);
        let outcome = sample_index(&probs, rng);
        rotated.collapse_computational(site, outcome, probs[outcome])?;
        if basis == Basis::Fourier {
            rotated.apply_in_place(site, &fourier_transform(self.dim))?;
        }
        Ok((
            MeasurementRecord {
                site,
                basis,
                outcome,
            },
            rotated,
        ))
    }

    /// Exact joint distribution of measuring every site, site `i` in `bases[i]`.
    pub fn outcome_distribution(&self, bases: &[Basis]) -> Result<Distribution> {
        if bases.len() != self.sites {
            return Err(Error::LengthMismatch {
                expected: self.sites,
                actual: bases.len(),
            });
        }
        let finv = fourier_transform(self.dim).adjoint();
        let mut rotated = self.clone();
        for (site, basis) in bases.iter().enumerate() {
            if *basis == Basis::Fourier {
                rotated.apply_in_place(site, &finv)?;
            }
        }
        Ok(rotated
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > SUPPORT_CUTOFF)
            .map(|(i, a)| (rotated.digits_of(i), a.norm_sqr()))
            .collect())
    }

    /// Plain-text dump, one `index(digits) re im` line per amplitude.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            let digits: Vec<String> = self.digits_of(i).iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{i}({}) {:.12} {:.12}", digits.join(","), a.re, a.im);
        }
        out
    }
}

fn index_of(dim: Dimension, digits: &[usize]) -> Result<usize> {
    digits.iter().try_fold(0usize, |acc, &x| {
        dim.check_digit(x)?;
        Ok(acc * dim.get() + x)
    })
}

/// Inverse-CDF draw from `probs`; never returns a zero-probability index.
fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= SUPPORT_CUTOFF {
            continue;
        }
        last_nonzero = i;
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_nonzero
}
