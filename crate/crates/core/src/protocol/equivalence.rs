use std::collections::BTreeMap;

use crate::qudit::{fourier_transform, omega_state, shift_operator, Basis, Dimension, Distribution};
use crate::{Error, Result};

/// Two routes to the encoded outcome distribution of `|ω⟩`.
///
/// `A`: every party `i` applies `U_{k_i}·F` and measures computationally.
/// `B`: every party measures in the Fourier basis and adds `k_i` mod `d`.
pub fn encode_equivalence_probe(dim: Dimension, n: usize, secrets: &[usize]) -> Result<(Distribution, Distribution)> {
    if secrets.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: secrets.len(),
        });
    }
    let f = fourier_transform(dim);
    let mut encoded = omega_state(n, dim)?;
    for (site, &k) in secrets.iter().enumerate() {
        encoded.apply_in_place(site, &(&shift_operator(k, dim)? * &f))?;
    }
    let a = encoded.outcome_distribution(&vec![Basis::Computational; n])?;

    let raw = omega_state(n, dim)?.outcome_distribution(&vec![Basis::Fourier; n])?;
    let mut b = BTreeMap::new();
    for (outcome, p) in raw {
        let shifted: Vec<usize> = outcome.iter().zip(secrets).map(|(&l, &k)| dim.add(l, k)).collect();
        *b.entry(shifted).or_insert(0.0) += p;
    }
    Ok((a, b))
}

/// `½ Σ |a(x) − b(x)|` over the union of supports.
pub fn total_variation(a: &Distribution, b: &Distribution) -> f64 {
    let keys: std::collections::BTreeSet<&Vec<usize>> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}
