use proptest::prelude::*;
use qsum_core::adversary::{AnnouncementModel, InterceptResend, P1Strategy};
use qsum_core::protocol::{
    encode_equivalence_probe, run_improved, run_yy2018, total_variation, PartyId, ProtocolConfig, SecretString,
    Verdict,
};
use qsum_core::qudit::Dimension;
use qsum_core::Error;

fn dim(d: usize) -> Dimension {
    Dimension::new(d).unwrap()
}

/// Digit-wise sum mod d, computed without the library.
fn plain_sum(d: usize, secrets: &[SecretString]) -> Vec<usize> {
    let len = secrets[0].digits.len();
    (0..len).map(|t| secrets.iter().map(|s| s.digits[t]).sum::<usize>() % d).collect()
}

#[test]
fn honest_sums_are_exact_on_the_grid() {
    for n in [3, 4] {
        for d in [2, 3, 5] {
            for len in 1..=6 {
                for seed in 0..10 {
                    let config = ProtocolConfig::new(n, dim(d), len).with_samples(3).with_seed(seed);
                    let secrets = SecretString::random_set(n, len, dim(d), seed ^ 0xABCD);
                    let expected = Some(plain_sum(d, &secrets));
                    let a = run_yy2018(&config, &secrets, None, P1Strategy::Honest).unwrap();
                    assert_eq!(a.sum, expected);
                    assert!(a.report.recovered.is_empty() && !a.report.detected);
                    let b = run_improved(&config, &secrets, None, P1Strategy::Honest, AnnouncementModel::P1First).unwrap();
                    assert_eq!(b.sum, expected);
                    assert!(b.report.recovered.is_empty() && !b.report.detected);
                }
            }
        }
    }
}

#[test]
fn decimal_example() {
    let d = dim(10);
    let secrets = SecretString::from_lists(&[vec![3, 9], vec![4, 8], vec![5, 7]], d).unwrap();
    let config = ProtocolConfig::new(3, d, 2).with_seed(1);
    let r = run_yy2018(&config, &secrets, None, P1Strategy::Honest).unwrap();
    assert_eq!(r.sum, Some(vec![2, 4]));
}

#[test]
fn equivalence_on_sampled_tuples() {
    for n in 2..=4 {
        for d in 2..=5 {
            for seed in 0..20u64 {
                let ks: Vec<usize> = (0..n).map(|i| (seed as usize * 7 + i * 3 + i * i) % d).collect();
                let (a, b) = encode_equivalence_probe(dim(d), n, &ks).unwrap();
                assert!(total_variation(&a, &b) < 1e-9);
            }
        }
    }
}

#[test]
fn aborted_runs_publish_nothing() {
    let eve = InterceptResend::new(1.0).unwrap();
    for seed in 0..30 {
        let config = ProtocolConfig::new(3, dim(3), 2).with_samples(2).with_decoys(20).with_seed(seed);
        let secrets = SecretString::random_set(3, 2, dim(3), seed);
        for r in [
            run_yy2018(&config, &secrets, Some(&eve), P1Strategy::Honest).unwrap(),
            run_improved(&config, &secrets, Some(&eve), P1Strategy::Honest, AnnouncementModel::P1First).unwrap(),
        ] {
            assert!(matches!(r.transcript.verdict, Verdict::AbortedChannel { .. }));
            assert!(r.sum.is_none());
            assert!(r.transcript.announcements.is_empty());
        }
    }
}

#[test]
fn invalid_configs_report_every_violation() {
    let config = ProtocolConfig::new(2, dim(2), 0).with_thresholds(1.5, -0.1);
    match config.validate() {
        Err(Error::Validation(v)) => assert!(v.len() >= 4, "{v:?}"),
        other => panic!("expected validation failure, got {other:?}"),
    }
    let big = ProtocolConfig::new(23, dim(2), 1);
    assert!(big.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), n in 3usize..=4, d in 2usize..=5, improved in any::<bool>()) {
        let config = ProtocolConfig::new(n, dim(d), 3).with_samples(2).with_seed(seed);
        let secrets = SecretString::random_set(n, 3, dim(d), seed);
        let run = || if improved {
            run_improved(&config, &secrets, None, P1Strategy::Honest, AnnouncementModel::P1First).unwrap()
        } else {
            run_yy2018(&config, &secrets, None, P1Strategy::Honest).unwrap()
        };
        prop_assert_eq!(run().to_json(), run().to_json());
    }

    #[test]
    fn honest_sum_invariant(seed in any::<u64>(), n in 3usize..=5, d in 2usize..=7, len in 1usize..=4) {
        let config = ProtocolConfig::new(n, dim(d), len).with_samples(2).with_seed(seed);
        let secrets = SecretString::random_set(n, len, dim(d), seed.rotate_left(7));
        let r = run_improved(&config, &secrets, None, P1Strategy::Honest, AnnouncementModel::P1First).unwrap();
        prop_assert_eq!(r.sum, Some(plain_sum(d, &secrets)));
        prop_assert_eq!(r.transcript.announcements.len(), n - 1);
        prop_assert!(r.transcript.announcements.iter().all(|a| a.party != PartyId::from_index(0)));
    }
}
