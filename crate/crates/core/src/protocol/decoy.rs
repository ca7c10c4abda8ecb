//! Decoy-qudit channel check.
//!
//! The sender hides single-qudit decoys, each a random `|v⟩` or `F|v⟩`, at
//! random positions of the outgoing sequence. After the receiver confirms
//! receipt the sender reveals positions and bases; the receiver measures each
//! decoy in the announced basis and returns the values; the sender computes the
//! fraction that disagree.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PartyId;
use crate::qudit::{fourier_transform, Basis, Dimension, PureState, SingleQuditUnitary};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyRecord {
    pub position: usize,
    pub basis: Basis,
    pub value: usize,
    /// Receiver's outcome in the announced basis, once measured.
    pub measured: Option<usize>,
}

/// One transmitted qudit.
#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    /// Component `site` of shared state `state`.
    Component { state: usize, site: usize },
    /// Decoy `record` (index into the sender's records) and its qudit.
    Decoy { record: usize, qudit: PureState },
}

/// Ordered sequence sent to one party, decoys included.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditSequence {
    pub owner: PartyId,
    pub slots: Vec<Slot>,
}

impl QuditSequence {
    /// Interleaves `count` random decoys at random positions among `components`.
    pub fn with_decoys<R: Rng + ?Sized>(
        owner: PartyId,
        components: &[(usize, usize)],
        count: usize,
        dim: Dimension,
        rng: &mut R,
    ) -> Result<(Self, Vec<DecoyRecord>)> {
        let total = components.len() + count;
        let mut positions = sample(rng, total, count).into_vec();
        positions.sort_unstable();
        let f = fourier_transform(dim);
        let mut records = Vec::with_capacity(count);
        let mut slots = Vec::with_capacity(total);
        let mut comps = components.iter();
        let mut next_decoy = positions.iter().peekable();
        for position in 0..total {
            if next_decoy.peek() == Some(&&position) {
                next_decoy.next();
                let basis = Basis::random(rng);
                let value = rng.random_range(0..dim.get());
                let prep = match basis {
                    Basis::Computational => SingleQuditUnitary::identity(dim),
                    Basis::Fourier => f.clone(),
                };
                slots.push(Slot::Decoy {
                    record: records.len(),
                    qudit: PureState::uniform_product(&prep, value, 1)?,
                });
                records.push(DecoyRecord {
                    position,
                    basis,
                    value,
                    measured: None,
                });
            } else {
                let &(state, site) = comps.next().expect("component count is consistent");
                slots.push(Slot::Component { state, site });
            }
        }
        Ok((QuditSequence { owner, slots }, records))
    }

    /// Receiver side: measures every decoy in its announced basis and records the
    /// result in `records`.
    pub fn measure_decoys<R: Rng + ?Sized>(&self, records: &mut [DecoyRecord], rng: &mut R) -> Result<Vec<usize>> {
        let mut results = Vec::with_capacity(records.len());
        for slot in &self.slots {
            if let Slot::Decoy { record, qudit } = slot {
                let rec = &mut records[*record];
                let (m, _) = qudit.measure_site(0, rec.basis, rng)?;
                rec.measured = Some(m.outcome);
                results.push(m.outcome);
            }
        }
        Ok(results)
    }

    /// The sequence with decoys discarded: `S_j` from `S'_j`.
    pub fn components(&self) -> Vec<(usize, usize)> {
        self.slots
            .iter()
            .filter_map(|s| match s {
                Slot::Component { state, site } => Some((*state, *site)),
                Slot::Decoy { .. } => None,
            })
            .collect()
    }
}

/// Fraction of decoys whose receiver outcome differs from the prepared value.
/// An empty check has error rate 0.
pub fn decoy_check(sender_records: &[DecoyRecord], receiver_results: &[usize]) -> Result<f64> {
    if sender_records.len() != receiver_results.len() {
        return Err(Error::LengthMismatch {
            expected: sender_records.len(),
            actual: receiver_results.len(),
        });
    }
    if sender_records.is_empty() {
        return Ok(0.0);
    }
    let errors = sender_records
        .iter()
        .zip(receiver_results)
        .filter(|(rec, &got)| rec.value != got)
        .count();
    Ok(errors as f64 / sender_records.len() as f64)
}
