//! Small statistical toolkit: covariance estimates with standard errors,
//! one-sided z tests, chi-square goodness of fit, empirical quantiles.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::par::{tree_mean, tree_sum};

/// Number of blocks of the grouped jackknife.
pub const JACKKNIFE_BLOCKS: usize = 20;

/// Which standard error was reported for a covariance estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeMethod {
    Delta,
    Jackknife,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovEstimate {
    pub estimate: f64,
    pub se: f64,
    pub method: SeMethod,
}

impl CovEstimate {
    /// `estimate / se`; zero when both vanish.
    pub fn z(&self) -> f64 {
        if self.se > 0.0 {
            self.estimate / self.se
        } else if self.estimate == 0.0 {
            0.0
        } else {
            self.estimate.signum() * f64::INFINITY
        }
    }

    /// `|estimate − target| <= k·se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.se
    }
}

/// Sample covariance (divisor `n − 1`).
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let (ma, mb) = (tree_mean(a), tree_mean(b));
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    tree_sum(&prod) / (n - 1) as f64
}

pub fn variance(a: &[f64]) -> f64 {
    covariance(a, a)
}

/// Delta-method standard error of the sample covariance:
/// `sqrt((m22 − c²) / n)` with `m22 = E[(a−ā)²(b−b̄)²]`. `None` when the fourth
/// moment term is not positive and finite.
pub fn delta_se(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 {
        return None;
    }
    let (ma, mb) = (tree_mean(a), tree_mean(b));
    let centred: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let c = tree_mean(&centred);
    let sq: Vec<f64> = centred.iter().map(|v| v * v).collect();
    let m22 = tree_mean(&sq);
    let v = m22 - c * c;
    (v.is_finite() && v > 0.0).then(|| (v / n as f64).sqrt())
}

/// Grouped (delete-a-block) jackknife standard error of the covariance.
pub fn jackknife_se(a: &[f64], b: &[f64], blocks: usize) -> Option<f64> {
    let n = a.len();
    let g = blocks.min(n);
    if g < 2 {
        return None;
    }
    let bounds: Vec<usize> = (0..=g).map(|k| k * n / g).collect();
    let leave_out: Vec<f64> = (0..g)
        .map(|k| {
            let (lo, hi) = (bounds[k], bounds[k + 1]);
            let ra: Vec<f64> = a[..lo].iter().chain(&a[hi..]).copied().collect();
            let rb: Vec<f64> = b[..lo].iter().chain(&b[hi..]).copied().collect();
            covariance(&ra, &rb)
        })
        .collect();
    let mean = tree_mean(&leave_out);
    let dev: Vec<f64> = leave_out.iter().map(|v| (v - mean).powi(2)).collect();
    let v = (g - 1) as f64 / g as f64 * tree_sum(&dev);
    (v.is_finite() && v > 0.0).then(|| v.sqrt())
}

/// Covariance estimate with a cross-checked standard error.
///
/// The delta-method error is used unless it is unavailable or disagrees with
/// the jackknife by more than a factor of two, in which case the larger
/// (jackknife) value is reported.
pub fn cov_estimate(a: &[f64], b: &[f64]) -> CovEstimate {
    let estimate = covariance(a, b);
    let delta = delta_se(a, b);
    let jack = jackknife_se(a, b, JACKKNIFE_BLOCKS);
    match (delta, jack) {
        (Some(d), Some(j)) if j > 2.0 * d || d > 2.0 * j => {
            CovEstimate { estimate, se: d.max(j), method: if j >= d { SeMethod::Jackknife } else { SeMethod::Delta } }
        }
        (Some(d), _) => CovEstimate { estimate, se: d, method: SeMethod::Delta },
        (None, Some(j)) => CovEstimate { estimate, se: j, method: SeMethod::Jackknife },
        (None, None) => CovEstimate { estimate, se: 0.0, method: SeMethod::Delta },
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    Normal::standard().cdf(z)
}

/// Upper-tail p-value `P(Z >= z)`.
pub fn upper_p(z: f64) -> f64 {
    (1.0 - normal_cdf(z)).clamp(0.0, 1.0)
}

/// Upper-tail probability of a chi-square variable.
pub fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    ChiSquared::new(dof).map(|c| (1.0 - c.cdf(stat)).clamp(0.0, 1.0)).unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquareFit {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of integer observations to a pmf on `0, 1, ...`.
///
/// Cells with expected count below 5 are merged into their neighbours from the
/// upper tail down; the last cell absorbs the whole remaining tail mass.
pub fn chi_square_gof(observations: &[usize], pmf: impl Fn(usize) -> f64) -> ChiSquareFit {
    let n = observations.len() as f64;
    let max_obs = observations.iter().copied().max().unwrap_or(0);
    let mut probs: Vec<f64> = (0..=max_obs).map(&pmf).collect();
    let head: f64 = probs.iter().sum();
    let mut counts = vec![0usize; max_obs + 1];
    for &o in observations {
        counts[o] += 1;
    }
    // tail above the largest observation goes into the last cell
    *probs.last_mut().unwrap() += (1.0 - head).max(0.0);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (p, c) in probs.iter().zip(&counts) {
        acc.0 += p * n;
        acc.1 += *c as f64;
        if acc.0 >= 5.0 {
            cells.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => cells.push(acc),
        }
    }
    let statistic: f64 = cells.iter().map(|(e, o)| (o - e).powi(2) / e).sum();
    let dof = cells.len().saturating_sub(1).max(1);
    ChiSquareFit { statistic, dof, p_value: chi_square_sf(statistic, dof as f64) }
}

/// Empirical quantile by the nearest-rank rule on a sorted copy.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let m = tree_mean(values);
    (m, (variance(values) / values.len() as f64).sqrt())
}
