use rand::seq::index::sample;

use super::correlation::correlation_check;
use super::session::Session;
use super::{
    Announcement, CorrelationEvent, PartyId, PreparedKind, PreparedState, ProtocolConfig,
    ProtocolKind, RoundResult, SecretString, Transcript, Verdict,
};
use crate::adversary::{
    AdversaryReport, AnnouncementModel, ExtractionRule, ExtractionStep, FakeStateFate,
    InterceptResend, P1Strategy,
};
use crate::qudit::{fourier_transform, omega_state, Basis, PureState};
use crate::{Error, Result};

/// Runs the improved summation protocol.
///
/// S1: `P1` prepares `N + q` states and distributes components behind decoys.
/// S2: decoy check. S3: `P2..Pn` sample `q` states and a basis for each; all
/// parties measure and announce, and the run aborts if the failing fraction
/// exceeds the threshold. S4: every party measures its remaining components in
/// the Fourier basis, reads outcome `F|l⟩` as `l`, and announces `K_j ⊕ L_j`;
/// `P1` adds everything.
pub fn run_improved(
    config: &ProtocolConfig,
    secrets: &[SecretString],
    channel_adversary: Option<&InterceptResend>,
    strategy: P1Strategy,
    model: AnnouncementModel,
) -> Result<RoundResult> {
    run_with_readout(config, secrets, channel_adversary, strategy, model).map(|(r, _)| r)
}

/// As [`run_improved`], also returning every party's Fourier outcomes `L_j`
/// (empty on abort).
pub(crate) fn run_with_readout(
    config: &ProtocolConfig,
    secrets: &[SecretString],
    channel_adversary: Option<&InterceptResend>,
    strategy: P1Strategy,
    model: AnnouncementModel,
) -> Result<(RoundResult, Vec<Vec<usize>>)> {
    config.validate()?;
    config.validate_secrets(secrets)?;
    let (n, dim, len, q) = (config.parties, config.dim, config.length, config.samples);
    let total = len + q;
    let fake = match strategy {
        P1Strategy::Honest => None,
        P1Strategy::FakeState { r, count } => {
            dim.check_digit(r)?;
            if count == 0 || count > total {
                return Err(Error::InvalidConfig {
                    field: "attack.count",
                    reason: format!("fake state count must lie in 1..={total}, got {count}"),
                });
            }
            Some((r, count))
        }
        other => {
            return Err(Error::UnsupportedStrategy {
                strategy: other.name(),
                protocol: "improved",
            })
        }
    };

    let mut session = Session::new(config.seed);
    let f = fourier_transform(dim);

    // S1: preparation. P1 places fake states before knowing the sample.
    let fake_positions: Vec<usize> = match fake {
        Some((_, count)) => {
            let mut p = sample(&mut session.rngs.preparer, total, count).into_vec();
            p.sort_unstable();
            p
        }
        None => Vec::new(),
    };
    let mut preparation = Vec::with_capacity(total);
    for position in 0..total {
        let is_fake = fake_positions.binary_search(&position).is_ok();
        let (state, kind) = match fake {
            Some((r, _)) if is_fake => (PureState::uniform_product(&f, r, n)?, PreparedKind::FourierProduct { r }),
            _ => (omega_state(n, dim)?, PreparedKind::Omega),
        };
        session.push(state);
        preparation.push(PreparedState { position, kind });
    }
    let layout: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|party| (0..total).map(|t| (t, party)).collect())
        .collect();

    // S2: transmission and decoy check.
    let (channels, failed) = session.distribute(config, &layout, channel_adversary)?;
    let mut transcript = Transcript {
        protocol: ProtocolKind::Improved,
        config: config.clone(),
        preparation,
        channels,
        correlation: None,
        announcements: Vec::new(),
        verdict: Verdict::AbortedCorrelation,
    };
    let mut report = AdversaryReport::default();
    let abort = |mut transcript: Transcript, mut report: AdversaryReport, verdict: Verdict| {
        transcript.verdict = verdict;
        report.set_verdict(&transcript.verdict);
        (
            RoundResult {
                sum: None,
                transcript,
                report,
            },
            Vec::new(),
        )
    };
    if let Some(receiver) = failed {
        return Ok(abort(transcript, report, Verdict::AbortedChannel { receiver }));
    }

    // S3: correlation check on q states chosen by P2..Pn.
    let mut sampled = sample(&mut session.rngs.verifiers, total, q).into_vec();
    sampled.sort_unstable();
    let bases: Vec<Basis> = sampled
        .iter()
        .map(|_| Basis::random(&mut session.rngs.verifiers))
        .collect();
    let outcome = correlation_check(
        &session.shared,
        &sampled,
        &bases,
        model,
        &strategy,
        &mut session.rngs.nature,
    )?;
    let passed = outcome.error_rate <= config.correlation_error_threshold;
    transcript.correlation = Some(CorrelationEvent {
        samples: outcome.samples,
        error_rate: outcome.error_rate,
        passed,
    });
    report.fake_states = fake_positions
        .iter()
        .map(|&position| FakeStateFate {
            position,
            sampled: sampled.binary_search(&position).is_ok(),
        })
        .collect();
    if !passed {
        return Ok(abort(transcript, report, Verdict::AbortedCorrelation));
    }

    // S4: Fourier readout of the retained states.
    let retained: Vec<usize> = (0..total)
        .filter(|p| sampled.binary_search(p).is_err())
        .collect();
    let mut readout = vec![vec![0; len]; n];
    for (party, row) in readout.iter_mut().enumerate() {
        for (t, &position) in retained.iter().enumerate() {
            row[t] = session.measure((position, party), Basis::Fourier)?;
        }
    }
    let masked: Vec<Vec<usize>> = readout
        .iter()
        .zip(secrets)
        .map(|(l, k)| l.iter().zip(&k.digits).map(|(&l, &k)| dim.add(k, l)).collect())
        .collect();
    transcript.announcements = (1..n)
        .map(|party| Announcement {
            party: PartyId::from_index(party),
            payload: masked[party].clone(),
        })
        .collect();

    let mut sum: Vec<usize> = (0..len)
        .map(|t| dim.sum(masked.iter().map(|m| m[t])))
        .collect();
    if let Some((r, _)) = fake {
        for fate in report.fake_states.clone() {
            let (digit, blind) = if fate.sampled {
                let before = retained.partition_point(|&p| p < fate.position);
                (before.min(len - 1), true)
            } else {
                let digit = retained.partition_point(|&p| p < fate.position);
                // A fake state contributes n·r instead of 0 to the shell sum.
                sum[digit] = dim.sub(sum[digit], n * r);
                (digit, false)
            };
            for (party, m) in masked.iter().enumerate().skip(1) {
                let announced = m[digit];
                report.record(ExtractionStep {
                    party: PartyId::from_index(party),
                    digit,
                    announced,
                    rule: ExtractionRule::SubtractPrepared { r },
                    guess: dim.sub(announced, r),
                    blind,
                });
            }
        }
    }

    transcript.verdict = Verdict::Completed { sum: sum.clone() };
    report.set_verdict(&transcript.verdict);
    Ok((
        RoundResult {
            sum: Some(sum),
            transcript,
            report,
        },
        readout,
    ))
}
