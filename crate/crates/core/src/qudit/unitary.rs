use std::f64::consts::PI;
use std::ops::Mul;

use super::{Amplitude, Dimension, TOLERANCE};
use crate::{Error, Result};

/// A `d × d` unitary acting on one qudit, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleQuditUnitary {
    dim: Dimension,
    entries: Vec<Amplitude>,
}

/// `ζ^k` with `ζ = e^{2πi/d}`, reducing the exponent first so large products
/// stay accurate.
pub(crate) fn root_of_unity(dim: Dimension, k: usize) -> Amplitude {
    let d = dim.get();
    Amplitude::from_polar(1.0, 2.0 * PI * (k % d) as f64 / d as f64)
}

/// The discrete Fourier transform `F|r⟩ = d^{-1/2} Σ_l ζ^{lr} |l⟩`.
pub fn fourier_transform(dim: Dimension) -> SingleQuditUnitary {
    let d = dim.get();
    let scale = 1.0 / (d as f64).sqrt();
    let entries = (0..d * d)
        .map(|i| root_of_unity(dim, (i / d) * (i % d)) * scale)
        .collect();
    SingleQuditUnitary { dim, entries }
}

/// The cyclic shift `U_k = Σ_u |u ⊕ k⟩⟨u|`.
pub fn shift_operator(k: usize, dim: Dimension) -> Result<SingleQuditUnitary> {
    dim.check_digit(k)?;
    let d = dim.get();
    let mut entries = vec![Amplitude::new(0.0, 0.0); d * d];
    for u in 0..d {
        entries[dim.add(u, k) * d + u] = Amplitude::new(1.0, 0.0);
    }
    Ok(SingleQuditUnitary { dim, entries })
}

impl SingleQuditUnitary {
    /// Builds an operator from row-major entries, rejecting non-unitary input.
    pub fn new(dim: Dimension, entries: Vec<Amplitude>) -> Result<Self> {
        let d = dim.get();
        if entries.len() != d * d {
            return Err(Error::LengthMismatch {
                expected: d * d,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let op = SingleQuditUnitary { dim, entries };
        if !op.is_unitary(TOLERANCE) {
            return Err(Error::NotUnitary);
        }
        Ok(op)
    }

    pub fn identity(dim: Dimension) -> Self {
        let d = dim.get();
        let entries = (0..d * d)
            .map(|i| {
                if i / d == i % d {
                    Amplitude::new(1.0, 0.0)
                } else {
                    Amplitude::new(0.0, 0.0)
                }
            })
            .collect();
        SingleQuditUnitary { dim, entries }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim.get() + col]
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim.get();
        let entries = (0..d * d)
            .map(|i| self.entries[(i % d) * d + i / d].conj())
            .collect();
        SingleQuditUnitary {
            dim: self.dim,
            entries,
        }
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &SingleQuditUnitary) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                actual: rhs.dim.get(),
            });
        }
        let d = self.dim.get();
        let mut entries = vec![Amplitude::new(0.0, 0.0); d * d];
        for (i, out) in entries.iter_mut().enumerate() {
            let (row, col) = (i / d, i % d);
            *out = (0..d).map(|k| self.entry(row, k) * rhs.entry(k, col)).sum();
        }
        Ok(SingleQuditUnitary {
            dim: self.dim,
            entries,
        })
    }

    /// Largest entrywise deviation of `M·M†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim.get();
        let mut worst = 0.0f64;
        for row in 0..d {
            for col in 0..d {
                let v: Amplitude = (0..d)
                    .map(|k| self.entry(row, k) * self.entry(col, k).conj())
                    .sum();
                let target = if row == col { 1.0 } else { 0.0 };
                worst = worst.max((v - Amplitude::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Applies the operator to a single-qudit amplitude vector.
    pub fn apply_to(&self, v: &[Amplitude]) -> Vec<Amplitude> {
        let d = self.dim.get();
        (0..d)
            .map(|row| (0..d).map(|k| self.entry(row, k) * v[k]).sum())
            .collect()
    }

    /// `M|col⟩`, the image of a computational basis vector.
    pub fn column(&self, col: usize) -> Vec<Amplitude> {
        (0..self.dim.get()).map(|row| self.entry(row, col)).collect()
    }

    /// Maximum entrywise distance to another operator.
    pub fn distance(&self, other: &SingleQuditUnitary) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for &SingleQuditUnitary {
    type Output = SingleQuditUnitary;

    /// Panics on dimension mismatch; use [`SingleQuditUnitary::compose`] for a
    /// checked product.
    fn mul(self, rhs: &SingleQuditUnitary) -> SingleQuditUnitary {
        self.compose(rhs).expect("dimension mismatch in operator product")
    }
}
