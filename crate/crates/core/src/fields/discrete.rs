use rand::seq::SliceRandom;
use rand_distr::{Binomial, Distribution, Gamma};

use super::FieldSample;
use crate::rng::SimRng;
use crate::{Error, Result};

/// Normalised Gamma vector `(X_1/X, ..., X_m/X)` with `X_n ~ Gamma(α_n, 1)`
/// over the first `m` coordinates of `alpha`.
pub fn sample_dirichlet_sequence(alpha: &[f64], truncation: usize, rng: &mut SimRng) -> Result<FieldSample> {
    if alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::param("Dirichlet parameters must be finite and nonnegative"));
    }
    let m = truncation.min(alpha.len());
    let prefix = &alpha[..m];
    if !prefix.iter().any(|&a| a > 0.0) {
        return Err(Error::param("all Dirichlet parameters within the truncation are zero"));
    }
    let mut x: Vec<f64> = prefix
        .iter()
        .map(|&a| if a > 0.0 { Gamma::new(a, 1.0).unwrap().sample(rng) } else { 0.0 })
        .collect();
    let total: f64 = x.iter().sum();
    if total > 0.0 {
        x.iter_mut().for_each(|v| *v /= total);
    } else {
        // every Gamma draw underflowed; the mass sits on the largest parameter
        let i = prefix.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        x[i] = 1.0;
    }
    Ok(FieldSample { values: x, truncation: (alpha.len() > truncation).then_some(truncation) })
}

/// Multinomial cell counts by sequential conditional binomials.
pub fn sample_multinomial(trials: u64, probs: &[f64], rng: &mut SimRng) -> Result<FieldSample> {
    if probs.is_empty() || probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::param("probabilities must be finite and nonnegative"));
    }
    if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::param("probabilities must sum to 1"));
    }
    let mut left = trials;
    let mut rest = 1.0;
    let mut values = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        let k = if i + 1 == probs.len() {
            left
        } else if left == 0 || rest <= 0.0 {
            0
        } else {
            let q = (p / rest).clamp(0.0, 1.0);
            Binomial::new(left, q).unwrap().sample(rng)
        };
        values.push(k as f64);
        left -= k;
        rest -= p;
    }
    Ok(FieldSample::new(values))
}

/// Uniformly random permutation of `values`.
pub fn sample_permutation(values: &[f64], rng: &mut SimRng) -> Result<FieldSample> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("permuted values must be finite"));
    }
    let mut v = values.to_vec();
    v.shuffle(rng);
    Ok(FieldSample::new(v))
}
