use serde::Serialize;

use crate::stats::covariance;
use crate::{Error, Result};

/// Both sides of `Cov(X, Y) = ∫∫ Cov(1{X > s}, 1{Y > t}) ds dt` on a sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub direct: f64,
    pub integral: f64,
    pub discrepancy: f64,
    pub grid: usize,
}

/// Midpoint-rule evaluation of the indicator double integral over the
/// sample range on a `grid × grid` mesh, against the direct sample
/// covariance. The integral uses empirical probabilities rescaled by
/// `n / (n − 1)`, so the two sides differ only by discretisation error.
pub fn covariance_identity_check(x: &[f64], y: &[f64], grid: usize) -> Result<IdentityCheck> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("need at least two paired samples"));
    }
    if grid == 0 {
        return Err(Error::param("grid must have at least one cell"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::param("samples must be finite (bounded)"));
    }
    let n = x.len();
    let direct = covariance(x, y);
    let bin = |v: &[f64]| -> (Vec<usize>, f64) {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let step = (hi - lo) / grid as f64;
        let idx = v
            .iter()
            .map(|&a| if step > 0.0 { (((a - lo) / step - 0.5).ceil().max(0.0) as usize).min(grid) } else { 0 })
            .collect();
        (idx, step)
    };
    let (kx, dx) = bin(x);
    let (ky, dy) = bin(y);
    // above[a][b] = #{kx > a, ky > b}
    let g = grid + 1;
    let mut above = vec![0u64; g * g];
    for (&a, &b) in kx.iter().zip(&ky) {
        above[a * g + b] += 1;
    }
    for a in (0..g).rev() {
        for b in (0..g).rev() {
            let mut v = above[a * g + b];
            if a + 1 < g {
                v += above[(a + 1) * g + b];
            }
            if b + 1 < g {
                v += above[a * g + b + 1];
            }
            if a + 1 < g && b + 1 < g {
                v -= above[(a + 1) * g + b + 1];
            }
            above[a * g + b] = v;
        }
    }
    let nf = n as f64;
    let tail = |k: &[usize]| -> Vec<f64> {
        let mut counts = vec![0u64; g];
        for &v in k {
            counts[v] += 1;
        }
        (0..grid).map(|a| counts[a + 1..].iter().sum::<u64>() as f64 / nf).collect()
    };
    let px = tail(&kx);
    let py = tail(&ky);
    let mut integral = 0.0;
    for a in 0..grid {
        for b in 0..grid {
            integral += above[(a + 1) * g + b + 1] as f64 / nf - px[a] * py[b];
        }
    }
    integral *= dx * dy * nf / (nf - 1.0);
    Ok(IdentityCheck { direct, integral, discrepancy: (direct - integral).abs(), grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn identical_uniforms() {
        let mut rng = stream(1, 0);
        let x: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let c = covariance_identity_check(&x, &x, 200).unwrap();
        assert!((c.direct - 1.0 / 12.0).abs() < 3e-3);
        assert!(c.discrepancy < 1e-3, "{c:?}");
    }

    #[test]
    fn discrepancy_shrinks_with_grid() {
        let mut rng = stream(2, 0);
        let x: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v + 0.1 * rng.random::<f64>()).collect();
        let coarse = covariance_identity_check(&x, &y, 5).unwrap();
        let fine = covariance_identity_check(&x, &y, 200).unwrap();
        assert!(fine.discrepancy < coarse.discrepancy);
    }

    #[test]
    fn constant_sample() {
        let c = covariance_identity_check(&[1.0; 10], &[2.0; 10], 10).unwrap();
        assert_eq!((c.direct, c.integral), (0.0, 0.0));
        assert!(covariance_identity_check(&[1.0], &[1.0], 10).is_err());
    }
}
