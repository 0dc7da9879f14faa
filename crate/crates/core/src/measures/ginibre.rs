use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::{PointConfiguration, Window};
use crate::rng::SimRng;
use crate::{Error, Result};

/// `n × n` matrix of i.i.d. standard complex normals (`E|z|² = 1`).
pub fn ginibre_matrix(n: usize, rng: &mut SimRng) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    })
}

/// Eigenvalues of an `n × n` Ginibre matrix as points of the plane.
///
/// The window is the square of half-side `√n + 8`, widened in the
/// (astronomically rare) event that an eigenvalue falls outside it.
pub fn sample_ginibre_finite(n: usize, rng: &mut SimRng) -> Result<PointConfiguration> {
    if n == 0 {
        return Err(Error::param("matrix size must be at least 1"));
    }
    let m = ginibre_matrix(n, rng);
    let eig = m
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::param("complex Schur form did not converge"))?;
    let radius = eig.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    let half = ((n as f64).sqrt() + 8.0).max((radius + 1.0).ceil());
    let window = Window { lo: vec![-half, -half], hi: vec![half, half] };
    let pts: Vec<Vec<f64>> = eig.iter().map(|z| vec![z.re, z.im]).collect();
    PointConfiguration::from_points(window, &pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::mean_se;

    #[test]
    fn single_entry_is_the_point() {
        let c = sample_ginibre_finite(1, &mut stream(1, 0)).unwrap();
        let m = ginibre_matrix(1, &mut stream(1, 0));
        assert_eq!(c.len(), 1);
        assert!((c.point(0)[0] - m[(0, 0)].re).abs() < 1e-12);
        assert!((c.point(0)[1] - m[(0, 0)].im).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_sum_matches_trace() {
        let mut rng = stream(2, 0);
        let c = sample_ginibre_finite(6, &mut rng).unwrap();
        let m = ginibre_matrix(6, &mut stream(2, 0));
        let tr = m.trace();
        let (re, im) = c.points().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        assert!((re - tr.re).abs() < 1e-8 && (im - tr.im).abs() < 1e-8);
    }

    #[test]
    fn n_two_mean_squared_modulus() {
        // moduli² are distributed as independent Gamma(1), Gamma(2): mean (1 + 2) / 2
        let vals: Vec<f64> = (0..40_000)
            .map(|i| {
                let c = sample_ginibre_finite(2, &mut stream(3, i)).unwrap();
                c.points().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / 2.0
            })
            .collect();
        let (m, se) = mean_se(&vals);
        assert!((m - 1.5).abs() < 4.0 * se, "{m} ± {se}");
    }

    #[test]
    fn spectral_radius_scales_like_sqrt_n() {
        let c = sample_ginibre_finite(50, &mut stream(4, 0)).unwrap();
        let r = c.points().map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).fold(0.0, f64::max);
        let ratio = r / 50f64.sqrt();
        assert!((0.8..1.5).contains(&ratio), "{ratio}");
    }
}
