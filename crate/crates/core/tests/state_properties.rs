use proptest::prelude::*;
use qsum_core::qudit::{
    fourier_transform, omega_state, shift_operator, Amplitude, Basis, Dimension, PureState, TOLERANCE,
};
use qsum_core::seed::stream;

fn dim(d: usize) -> Dimension {
    Dimension::new(d).unwrap()
}

/// Independent oracle for `⟨l_1…l_n| F^{†⊗n} |ω⟩`:
/// `d^{-1/2} Σ_r Π_i conj(ζ^{l_i r})/√d`.
fn decomposition_oracle(d: usize, ls: &[usize]) -> Amplitude {
    let n = ls.len() as i32;
    let mut acc = Amplitude::new(0.0, 0.0);
    for r in 0..d {
        let phase: usize = ls.iter().map(|&l| l * r).sum();
        let angle = -2.0 * std::f64::consts::PI * (phase % d) as f64 / d as f64;
        acc += Amplitude::from_polar(1.0, angle);
    }
    acc / (d as f64).sqrt().powi(n + 1)
}

#[test]
fn unitarity_up_to_sixteen_levels() {
    for d in 2..=16 {
        assert!(fourier_transform(dim(d)).is_unitary(TOLERANCE));
        for k in 0..d {
            assert!(shift_operator(k, dim(d)).unwrap().is_unitary(TOLERANCE));
        }
    }
}

#[test]
fn omega_fourier_decomposition() {
    for n in 2..=5 {
        for d in 2..=5 {
            let mut state = omega_state(n, dim(d)).unwrap();
            let f_dag = fourier_transform(dim(d)).adjoint();
            for site in 0..n {
                state.apply_in_place(site, &f_dag).unwrap();
            }
            let shell = (d as f64).powf(-((n - 1) as f64) / 2.0);
            for index in 0..d.pow(n as u32) {
                let ls = state.digits_of(index);
                let amp = state.amplitudes()[index];
                let on_shell = ls.iter().sum::<usize>() % d == 0;
                let expected = if on_shell { shell } else { 0.0 };
                assert!((amp - Amplitude::new(expected, 0.0)).norm() < TOLERANCE, "n={n} d={d} {ls:?}");
                assert!((amp - decomposition_oracle(d, &ls)).norm() < TOLERANCE);
            }
        }
    }
}

#[test]
fn encode_inverts_inverse_fourier() {
    for d in 2..=7 {
        let f = fourier_transform(dim(d));
        for r in 0..d {
            let prepared = PureState::basis(dim(d), &[r]).unwrap().apply_single(0, &f.adjoint()).unwrap();
            for k in 0..d {
                let encode = &shift_operator(k, dim(d)).unwrap() * &f;
                let out = prepared.apply_single(0, &encode).unwrap();
                let expected = PureState::basis(dim(d), &[(k + r) % d]).unwrap();
                let gap: f64 = out
                    .amplitudes()
                    .iter()
                    .zip(expected.amplitudes())
                    .map(|(a, b)| (a - b).norm())
                    .sum();
                assert!(gap < TOLERANCE);
            }
        }
    }
}

#[test]
fn sampling_matches_distribution() {
    let d = dim(3);
    let f = fourier_transform(d);
    let mut state = omega_state(3, d).unwrap();
    state.apply_in_place(1, &f).unwrap();
    let exact = state.site_probabilities(0, Basis::Fourier).unwrap();
    let trials = 100_000;
    let mut counts = [0usize; 3];
    let mut rng = stream(2024, 0);
    for _ in 0..trials {
        let (rec, _) = state.measure_site(0, Basis::Fourier, &mut rng).unwrap();
        counts[rec.outcome] += 1;
    }
    for (c, p) in counts.iter().zip(exact) {
        let freq = *c as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 5.0 * se + 1e-12, "freq {freq} vs {p}");
    }
}

fn arb_state() -> impl Strategy<Value = PureState> {
    (2usize..=4, 1usize..=3).prop_flat_map(|(d, m)| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d.pow(m as u32)).prop_filter_map(
            "non-zero vector",
            move |raw| {
                let norm: f64 = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
                (norm > 1e-3).then(|| {
                    let amps = raw.iter().map(|&(a, b)| Amplitude::new(a / norm, b / norm)).collect();
                    PureState::from_amplitudes(dim(d), m, amps).unwrap()
                })
            },
        )
    })
}

proptest! {
    #[test]
    fn operations_preserve_norm(state in arb_state(), k in 0usize..4, seed in any::<u64>()) {
        let d = state.dim();
        let site = (seed as usize) % state.sites();
        let op = &shift_operator(k % d.get(), d).unwrap() * &fourier_transform(d);
        let moved = state.apply_single(site, &op).unwrap();
        prop_assert!((moved.norm_sqr() - 1.0).abs() < TOLERANCE);
        let basis = if seed % 2 == 0 { Basis::Computational } else { Basis::Fourier };
        let (_, collapsed) = moved.measure_site(site, basis, &mut stream(seed, 0)).unwrap();
        prop_assert!((collapsed.norm_sqr() - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn repeated_measurement_is_stable(state in arb_state(), seed in any::<u64>(), fourier in any::<bool>()) {
        let basis = if fourier { Basis::Fourier } else { Basis::Computational };
        let site = (seed as usize) % state.sites();
        let mut rng = stream(seed, 1);
        let (first, collapsed) = state.measure_site(site, basis, &mut rng).unwrap();
        for _ in 0..3 {
            let (again, _) = collapsed.measure_site(site, basis, &mut rng).unwrap();
            prop_assert_eq!(again.outcome, first.outcome);
        }
    }

    #[test]
    fn distributions_sum_to_one(state in arb_state(), mask in any::<u8>()) {
        let bases: Vec<Basis> = (0..state.sites())
            .map(|i| if mask >> i & 1 == 1 { Basis::Fourier } else { Basis::Computational })
            .collect();
        let total: f64 = state.outcome_distribution(&bases).unwrap().values().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
