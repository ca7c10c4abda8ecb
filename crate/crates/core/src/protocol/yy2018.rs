use super::session::Session;
use super::{
    Announcement, PartyId, PreparedKind, PreparedState, ProtocolConfig, ProtocolKind, RoundResult,
    SecretString, Transcript, Verdict,
};
use crate::adversary::{AdversaryReport, ExtractionRule, ExtractionStep, InterceptResend, P1Strategy};
use crate::qudit::{fourier_transform, omega_state, shift_operator, Basis};
use crate::{Error, Result};

/// How `P1` will turn the outcomes of one position into a sum digit.
enum Position {
    Honest,
    /// All components collapsed to `F†|r⟩`.
    Collapsed { r: usize },
    /// Component 1 of a rotated state went to `target`; `P1` holds `held`
    /// (state, site) pairs.
    Rotated {
        target: PartyId,
        held: Vec<(usize, usize)>,
    },
}

/// Runs the QFT-encoding summation protocol.
///
/// Steps: `P1` prepares `N` entangled states (or her attack states) and sends
/// component `i` of each to `P_i` behind decoys; the decoy check may abort;
/// every party applies `U_{k}·F` to its components, measures computationally and
/// announces to `P1`, who publishes the modular sum.
pub fn run_yy2018(
    config: &ProtocolConfig,
    secrets: &[SecretString],
    channel_adversary: Option<&InterceptResend>,
    strategy: P1Strategy,
) -> Result<RoundResult> {
    config.validate()?;
    config.validate_secrets(secrets)?;
    let (n, dim, len) = (config.parties, config.dim, config.length);
    match strategy {
        P1Strategy::Honest | P1Strategy::Attack1 => {}
        P1Strategy::Attack2 { party, digit } => {
            if party.label() < 2 || party.label() > n {
                return Err(Error::InvalidConfig {
                    field: "attack.party",
                    reason: format!("target must be one of P2..P{n}, got {party}"),
                });
            }
            if digit >= len {
                return Err(Error::InvalidConfig {
                    field: "attack.digit",
                    reason: format!("digit index {digit} is beyond the string length {len}"),
                });
            }
        }
        P1Strategy::FakeState { .. } => {
            return Err(Error::UnsupportedStrategy {
                strategy: strategy.name(),
                protocol: "yy2018",
            })
        }
    }

    let f = fourier_transform(dim);
    let finv = f.adjoint();
    let mut session = Session::new(config.seed);
    let mut layout: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(len); n];
    let mut positions = Vec::with_capacity(len);
    let mut preparation = Vec::new();

    // Step 1: preparation.
    for t in 0..len {
        let attack2_target = match strategy {
            P1Strategy::Attack2 { party, digit } if digit == t => Some(party),
            _ => None,
        };
        if let Some(target) = attack2_target {
            let mut rotated = omega_state(n, dim)?;
            for site in 1..n {
                rotated.apply_in_place(site, &f)?;
            }
            let rs = session.push(rotated);
            let aux = session.push(omega_state(n - 1, dim)?);
            let mut aux_site = 0;
            for (party, slots) in layout.iter_mut().enumerate() {
                if party == target.index() {
                    slots.push((rs, 0));
                } else {
                    slots.push((aux, aux_site));
                    aux_site += 1;
                }
            }
            preparation.push(PreparedState {
                position: t,
                kind: PreparedKind::RotatedOmega { target },
            });
            preparation.push(PreparedState {
                position: t,
                kind: PreparedKind::ReducedOmega { excluded: target },
            });
            positions.push(Position::Rotated {
                target,
                held: (1..n).map(|site| (rs, site)).collect(),
            });
            continue;
        }

        let s = session.push(omega_state(n, dim)?);
        for (party, slots) in layout.iter_mut().enumerate() {
            slots.push((s, party));
        }
        if strategy == P1Strategy::Attack1 {
            // Measure every component, then rotate each by F†.
            let mut r = 0;
            for site in 0..n {
                let outcome = session.measure((s, site), Basis::Computational)?;
                if site == 0 {
                    r = outcome;
                }
            }
            for site in 0..n {
                session.apply((s, site), &finv)?;
            }
            preparation.push(PreparedState {
                position: t,
                kind: PreparedKind::InverseFourierProduct { r },
            });
            positions.push(Position::Collapsed { r });
        } else {
            preparation.push(PreparedState {
                position: t,
                kind: PreparedKind::Omega,
            });
            positions.push(Position::Honest);
        }
    }

    // Step 2: transmission and decoy check.
    let (channels, failed) = session.distribute(config, &layout, channel_adversary)?;
    let mut transcript = Transcript {
        protocol: ProtocolKind::Yy2018,
        config: config.clone(),
        preparation,
        channels,
        correlation: None,
        announcements: Vec::new(),
        verdict: Verdict::AbortedCorrelation,
    };
    let mut report = AdversaryReport::default();
    if let Some(receiver) = failed {
        transcript.verdict = Verdict::AbortedChannel { receiver };
        report.set_verdict(&transcript.verdict);
        return Ok(RoundResult {
            sum: None,
            transcript,
            report,
        });
    }

    // Step 3: every party encodes with U_k·F.
    for (party, slots) in layout.iter().enumerate() {
        for (t, &slot) in slots.iter().enumerate() {
            let encode = &shift_operator(secrets[party].digits[t], dim)? * &f;
            session.apply(slot, &encode)?;
        }
    }

    // Step 4: computational measurement and announcements.
    let mut outcomes = vec![vec![0; len]; n];
    for (party, slots) in layout.iter().enumerate() {
        for (t, &slot) in slots.iter().enumerate() {
            outcomes[party][t] = session.measure(slot, Basis::Computational)?;
        }
    }
    transcript.announcements = (1..n)
        .map(|party| Announcement {
            party: PartyId::from_index(party),
            payload: outcomes[party].clone(),
        })
        .collect();

    let mut sum = Vec::with_capacity(len);
    for (t, position) in positions.iter().enumerate() {
        let column = || outcomes.iter().map(|m| m[t]);
        let digit = match position {
            Position::Honest => dim.sum(column()),
            Position::Collapsed { r } => {
                for (party, m) in outcomes.iter().enumerate().skip(1) {
                    let announced = m[t];
                    report.record(ExtractionStep {
                        party: PartyId::from_index(party),
                        digit: t,
                        announced,
                        rule: ExtractionRule::SubtractPrepared { r: *r },
                        guess: dim.sub(announced, *r),
                        blind: false,
                    });
                }
                // Every outcome carries the offset r.
                dim.sub(dim.sum(column()), n * r)
            }
            Position::Rotated { target, held } => {
                let held_outcomes: Vec<usize> = held
                    .iter()
                    .map(|&slot| session.measure(slot, Basis::Computational))
                    .collect::<Result<_>>()?;
                let announced = outcomes[target.index()][t];
                let guess = dim.add(announced, dim.sum(held_outcomes.iter().copied()));
                report.record(ExtractionStep {
                    party: *target,
                    digit: t,
                    announced,
                    rule: ExtractionRule::AddHeldOutcomes {
                        held: held_outcomes,
                    },
                    guess,
                    blind: false,
                });
                let others = column()
                    .enumerate()
                    .filter(|(party, _)| *party != target.index())
                    .map(|(_, m)| m);
                dim.add(dim.sum(others), guess)
            }
        };
        sum.push(digit);
    }

    transcript.verdict = Verdict::Completed { sum: sum.clone() };
    report.set_verdict(&transcript.verdict);
    Ok(RoundResult {
        sum: Some(sum),
        transcript,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::reference_sum;
    use crate::qudit::Dimension;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn run(n: usize, d: usize, lists: &[Vec<usize>], seed: u64) -> RoundResult {
        let dd = dim(d);
        let config = ProtocolConfig::new(n, dd, lists[0].len()).with_seed(seed);
        let secrets = SecretString::from_lists(lists, dd).unwrap();
        run_yy2018(&config, &secrets, None, P1Strategy::Honest).unwrap()
    }

    #[test]
    fn decimal_example() {
        let r = run(3, 10, &[vec![3, 9], vec![4, 8], vec![5, 7]], 1);
        assert_eq!(r.sum, Some(vec![2, 4]));
        assert!(r.completed());
        assert!(r.report.recovered.is_empty());
        assert!(!r.report.detected);
    }

    #[test]
    fn zero_secrets_and_xor() {
        assert_eq!(run(4, 3, &vec![vec![0; 3]; 4], 2).sum, Some(vec![0; 3]));
        assert_eq!(run(3, 2, &[vec![1], vec![1], vec![1]], 3).sum, Some(vec![1]));
    }

    #[test]
    fn honest_runs_are_exact_across_seeds() {
        let dd = dim(5);
        let lists = vec![vec![1, 2, 3, 4], vec![4, 4, 0, 1], vec![2, 0, 0, 3]];
        let secrets = SecretString::from_lists(&lists, dd).unwrap();
        for seed in 0..50 {
            let r = run(3, 5, &lists, seed);
            assert_eq!(r.sum, Some(reference_sum(dd, &secrets)));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let dd = dim(3);
        let config = ProtocolConfig::new(3, dd, 1);
        let secrets = SecretString::from_lists(&[vec![0], vec![1], vec![2]], dd).unwrap();
        let fake = P1Strategy::FakeState { r: 0, count: 1 };
        assert!(matches!(
            run_yy2018(&config, &secrets, None, fake),
            Err(Error::UnsupportedStrategy { .. })
        ));
        let wrong_target = P1Strategy::Attack2 { party: PartyId::PREPARER, digit: 0 };
        assert!(run_yy2018(&config, &secrets, None, wrong_target).is_err());
        assert!(run_yy2018(&config, &secrets[..2], None, P1Strategy::Honest).is_err());
    }

    #[test]
    fn transcript_is_ordered_and_deterministic() {
        let a = run(3, 5, &[vec![1, 2], vec![3, 4], vec![0, 0]], 11);
        let b = run(3, 5, &[vec![1, 2], vec![3, 4], vec![0, 0]], 11);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.transcript.channels.len(), 2);
        assert!(a.transcript.channels.iter().all(|c| c.passed && c.slots == 2 + c.decoys.len()));
        assert_eq!(a.transcript.announcements.len(), 2);
    }

    #[test]
    fn eavesdropper_triggers_channel_abort() {
        let dd = dim(3);
        let config = ProtocolConfig::new(3, dd, 2).with_decoys(40).with_seed(9);
        let secrets = SecretString::from_lists(&[vec![0, 1], vec![1, 2], vec![2, 0]], dd).unwrap();
        let eve = InterceptResend::new(1.0).unwrap();
        let r = run_yy2018(&config, &secrets, Some(&eve), P1Strategy::Honest).unwrap();
        assert!(matches!(r.transcript.verdict, Verdict::AbortedChannel { .. }));
        assert_eq!(r.sum, None);
        assert!(r.transcript.announcements.is_empty());
        assert!(r.report.detected);
    }
}
