//! Dense linear algebra for `d`-level quantum systems.
//!
//! Multi-qudit states are stored as a flat amplitude vector of length `d^m`.
//! Basis index `i` is read as `m` base-`d` digits with site 0 as the most
//! significant digit. Sites are 0-based here; transcripts use 1-based party
//! labels.

mod state;
mod unitary;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use num_complex::Complex64 as Amplitude;
pub use state::{omega_state, Distribution, PureState, MAX_AMPLITUDES};
pub use unitary::{fourier_transform, shift_operator, SingleQuditUnitary};

/// Absolute tolerance for every floating-point equality in the crate.
pub const TOLERANCE: f64 = 1e-9;

/// Number of levels of a qudit, `d >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Dimension(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// `a ⊕ b`, addition modulo `d`.
    #[inline]
    pub fn add(self, a: usize, b: usize) -> usize {
        (a % self.0 + b % self.0) % self.0
    }

    /// `a ⊖ b`, subtraction modulo `d`.
    #[inline]
    pub fn sub(self, a: usize, b: usize) -> usize {
        (a % self.0 + self.0 - b % self.0) % self.0
    }

    #[inline]
    pub fn neg(self, a: usize) -> usize {
        self.sub(0, a)
    }

    /// Digitwise modular sum of an iterator of values.
    pub fn sum<I: IntoIterator<Item = usize>>(self, values: I) -> usize {
        values.into_iter().fold(0, |acc, v| self.add(acc, v))
    }

    pub fn check_digit(self, value: usize) -> Result<usize> {
        if value >= self.0 {
            return Err(Error::DigitOutOfRange {
                value,
                dim: self.0,
            });
        }
        Ok(value)
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Measurement basis for a single qudit.
///
/// Fourier-basis outcome `l` is the projector `F|l⟩⟨l|F†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Computational,
    Fourier,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Computational, Basis::Fourier];

    /// Uniformly random basis.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Basis::Fourier
        } else {
            Basis::Computational
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Basis::Computational => write!(f, "computational"),
            Basis::Fourier => write!(f, "fourier"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub site: usize,
    pub basis: Basis,
    pub outcome: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_rejects_below_two() {
        assert_eq!(Dimension::new(1), Err(Error::InvalidDimension(1)));
        assert_eq!(Dimension::new(0), Err(Error::InvalidDimension(0)));
        assert!(Dimension::new(2).is_ok());
    }

    #[test]
    fn modular_helpers() {
        let d = Dimension::new(5).unwrap();
        assert_eq!(d.add(3, 4), 2);
        assert_eq!(d.sub(1, 3), 3);
        assert_eq!(d.neg(0), 0);
        assert_eq!(d.neg(2), 3);
        assert_eq!(d.sum([1, 2, 4]), 2);
    }

    #[test]
    fn dimension_deserialization_validates() {
        let ok: Dimension = serde_json::from_str("3").unwrap();
        assert_eq!(ok.get(), 3);
        assert!(serde_json::from_str::<Dimension>("1").is_err());
    }
}
