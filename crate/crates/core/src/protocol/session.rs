//! Machinery shared by both protocol runners.

use super::{ChannelEvent, PartyId, ProtocolConfig, QuditSequence};
use crate::adversary::{intercept_resend_eve, InterceptResend};
use crate::protocol::decoy_check;
use crate::qudit::{Basis, PureState, SingleQuditUnitary};
use crate::seed::{stream, SimRng};
use crate::Result;

const STREAM_NATURE: u64 = 0;
const STREAM_PREPARER: u64 = 1;
const STREAM_VERIFIERS: u64 = 2;
const STREAM_EVE: u64 = 3;

/// Independent randomness sources of one run.
pub(crate) struct Rngs {
    /// Quantum measurement outcomes.
    pub nature: SimRng,
    /// `P1`'s classical choices: decoys, placement of fake states.
    pub preparer: SimRng,
    /// Joint randomness of `P2..Pn` for the correlation check.
    pub verifiers: SimRng,
    pub eve: SimRng,
}

impl Rngs {
    pub fn new(seed: u64) -> Self {
        Rngs {
            nature: stream(seed, STREAM_NATURE),
            preparer: stream(seed, STREAM_PREPARER),
            verifiers: stream(seed, STREAM_VERIFIERS),
            eve: stream(seed, STREAM_EVE),
        }
    }
}

/// Jointly held entangled states plus the randomness that drives them.
pub(crate) struct Session {
    pub shared: Vec<PureState>,
    pub rngs: Rngs,
}

impl Session {
    pub fn new(seed: u64) -> Self {
        Session {
            shared: Vec::new(),
            rngs: Rngs::new(seed),
        }
    }

    pub fn push(&mut self, state: PureState) -> usize {
        self.shared.push(state);
        self.shared.len() - 1
    }

    pub fn apply(&mut self, (state, site): (usize, usize), op: &SingleQuditUnitary) -> Result<()> {
        self.shared[state].apply_in_place(site, op)
    }

    pub fn measure(&mut self, (state, site): (usize, usize), basis: Basis) -> Result<usize> {
        let (rec, collapsed) = self.shared[state].measure_site(site, basis, &mut self.rngs.nature)?;
        self.shared[state] = collapsed;
        Ok(rec.outcome)
    }

    /// Sends `S'_j` to every `P_j`, `j >= 2`, and runs the decoy checks.
    ///
    /// `layout[i]` lists party `i`'s components in position order; entry 0
    /// (`P1`) stays home. Returns one event per channel and the first receiver
    /// whose error rate exceeded the threshold.
    pub fn distribute(
        &mut self,
        config: &ProtocolConfig,
        layout: &[Vec<(usize, usize)>],
        eve: Option<&InterceptResend>,
    ) -> Result<(Vec<ChannelEvent>, Option<PartyId>)> {
        let mut events = Vec::with_capacity(layout.len().saturating_sub(1));
        let mut failed = None;
        for (index, components) in layout.iter().enumerate().skip(1) {
            let receiver = PartyId::from_index(index);
            let (mut seq, mut records) = QuditSequence::with_decoys(
                receiver,
                components,
                config.decoys_per_channel,
                config.dim,
                &mut self.rngs.preparer,
            )?;
            let mut interceptions = Vec::new();
            if let Some(eve) = eve {
                let (tampered, log) = intercept_resend_eve(
                    &seq,
                    &mut self.shared,
                    eve.fraction,
                    &mut self.rngs.eve,
                    &mut self.rngs.nature,
                )?;
                seq = tampered;
                interceptions = log;
            }
            let results = seq.measure_decoys(&mut records, &mut self.rngs.nature)?;
            let error_rate = decoy_check(&records, &results)?;
            let passed = error_rate <= config.channel_error_threshold;
            if !passed && failed.is_none() {
                failed = Some(receiver);
            }
            events.push(ChannelEvent {
                receiver,
                slots: seq.slots.len(),
                decoys: records,
                interceptions,
                error_rate,
                passed,
            });
        }
        Ok((events, failed))
    }
}
