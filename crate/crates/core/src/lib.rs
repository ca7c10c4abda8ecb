//! Exact simulation of qudit-based multi-party quantum summation.
//!
//! The crate is organised bottom-up:
//!
//! - [`qudit`]: dense state vectors over `d`-level systems, the discrete Fourier
//!   transform, shift operators and projective measurement in the computational
//!   and Fourier bases.
//! - [`protocol`]: party state machines for the QFT-encoding summation protocol
//!   and the improved variant with an entanglement correlation check, including
//!   decoy-qudit channel checks and transcripts.
//! - [`adversary`]: attacks by the state-preparing party `P1`, the fake-state
//!   attack on the improved protocol, and an intercept-resend eavesdropper.
//! - [`analysis`]: exact rational oracles and a seeded Monte Carlo engine.
//!
//! All randomness is injected; a run is a pure function of its configuration,
//! inputs and seed.

pub mod adversary;
pub mod analysis;
mod error;
pub mod protocol;
pub mod qudit;
pub mod seed;

pub use error::{Error, Result, Violation};
