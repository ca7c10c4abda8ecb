use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::protocol::{decoy_check, PartyId, QuditSequence, Slot};
use crate::qudit::{Basis, Dimension, PureState};
use crate::Result;

/// One intercepted qudit: where, in which basis Eve measured, what she saw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveRecord {
    pub receiver: PartyId,
    pub position: usize,
    pub basis: Basis,
    pub outcome: usize,
}

/// Intercept-resend on a sequence in transit.
///
/// Every slot is attacked independently with probability `fraction`. Eve
/// measures in a uniformly random basis and forwards the post-measurement
/// eigenstate. For an entangled component the collapse acts on the jointly held
/// state in `shared`.
pub fn intercept_resend_eve<R: Rng + ?Sized, N: Rng + ?Sized>(
    stream: &QuditSequence,
    shared: &mut [PureState],
    fraction: f64,
    eve_rng: &mut R,
    nature: &mut N,
) -> Result<(QuditSequence, Vec<EveRecord>)> {
    let mut out = stream.clone();
    let mut log = Vec::new();
    for (position, slot) in out.slots.iter_mut().enumerate() {
        if fraction <= 0.0 || !eve_rng.random_bool(fraction) {
            continue;
        }
        let basis = Basis::random(eve_rng);
        let outcome = match slot {
            Slot::Component { state, site } => {
                let (rec, collapsed) = shared[*state].measure_site(*site, basis, nature)?;
                shared[*state] = collapsed;
                rec.outcome
            }
            Slot::Decoy { qudit, .. } => {
                let (rec, collapsed) = qudit.measure_site(0, basis, nature)?;
                *qudit = collapsed;
                rec.outcome
            }
        };
        log.push(EveRecord {
            receiver: stream.owner,
            position,
            basis,
            outcome,
        });
    }
    Ok((out, log))
}

/// Sends one random decoy through a full intercept-resend attack and reports
/// whether the receiver's check flags it.
pub fn eve_decoy_trial<R: Rng>(dim: Dimension, rng: &mut R) -> Result<bool> {
    let receiver = PartyId::from_index(1);
    let (seq, mut records) = QuditSequence::with_decoys(receiver, &[], 1, dim, rng)?;
    let mut eve_rng = crate::seed::SimRng::from_rng(rng);
    let (seq, _) = intercept_resend_eve(&seq, &mut [], 1.0, &mut eve_rng, rng)?;
    let results = seq.measure_decoys(&mut records, rng)?;
    Ok(decoy_check(&records, &results)? > 0.0)
}
