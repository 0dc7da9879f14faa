use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::FieldSample;
use crate::rng::SimRng;
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Mean vector and covariance matrix of a Gaussian field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSpec {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl CovarianceSpec {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let s = CovarianceSpec { mean, cov };
        s.validate()?;
        Ok(s)
    }

    /// Shape and symmetry checks; definiteness is checked by [`GaussianField::new`].
    pub fn validate(&self) -> Result<()> {
        let n = self.mean.len();
        if n == 0 {
            return Err(Error::InvalidCovariance("empty index set".into()));
        }
        if self.cov.len() != n || self.cov.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCovariance(format!("covariance must be {n}×{n}")));
        }
        if self.mean.iter().chain(self.cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCovariance("non-finite entry".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (self.cov[i][j] - self.cov[j][i]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidCovariance(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// A Gaussian field with its spectral square root precomputed.
#[derive(Clone, Debug)]
pub struct GaussianField {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl GaussianField {
    pub fn new(spec: &CovarianceSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.dim();
        let cov = DMatrix::from_fn(n, n, |i, j| spec.cov[i][j]);
        let eig = cov.clone().symmetric_eigen();
        let mut roots = Vec::with_capacity(n);
        for &l in eig.eigenvalues.iter() {
            if l < -PSD_TOL {
                return Err(Error::InvalidCovariance(format!("eigenvalue {l:e} is negative")));
            }
            roots.push(l.max(0.0).sqrt());
        }
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(roots));
        Ok(GaussianField { mean: DVector::from_vec(spec.mean.clone()), cov, factor })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn sample(&self, rng: &mut SimRng) -> FieldSample {
        let z = DVector::from_fn(self.dim(), |_, _| StandardNormal.sample(rng));
        let x = &self.mean + &self.factor * z;
        FieldSample::new(x.iter().copied().collect())
    }
}

pub fn sample_gaussian_field(spec: &CovarianceSpec, rng: &mut SimRng) -> Result<FieldSample> {
    Ok(GaussianField::new(spec)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::cov_estimate;

    fn draws(spec: &CovarianceSpec, n: u64, seed: u64) -> Vec<Vec<f64>> {
        let f = GaussianField::new(spec).unwrap();
        (0..n).map(|r| f.sample(&mut stream(seed, r)).values).collect()
    }

    #[test]
    fn rejects_invalid() {
        assert!(CovarianceSpec::new(vec![0.0; 2], vec![vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(CovarianceSpec::new(vec![0.0; 2], vec![vec![1.0]]).is_err());
        let indefinite = CovarianceSpec::new(vec![0.0; 2], vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(GaussianField::new(&indefinite), Err(Error::InvalidCovariance(_))));
        // semidefinite up to rounding is accepted
        let rank_one = CovarianceSpec::new(vec![0.0; 2], vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(GaussianField::new(&rank_one).is_ok());
    }

    #[test]
    fn zero_covariance_is_constant() {
        let spec = CovarianceSpec::new(vec![1.5, -2.0], vec![vec![0.0; 2]; 2]).unwrap();
        for v in draws(&spec, 10, 1) {
            assert_eq!(v, vec![1.5, -2.0]);
        }
    }

    #[test]
    fn negatively_correlated_orthants() {
        // P(X1 > 0, X2 > 0) = 1/4 + asin(ρ)/(2π)
        let rho: f64 = -0.5;
        let target = rho.asin() / (2.0 * std::f64::consts::PI);
        let spec = CovarianceSpec::new(vec![0.0; 2], vec![vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let (a, b): (Vec<f64>, Vec<f64>) = draws(&spec, 100_000, 2)
            .into_iter()
            .map(|v| ((v[0] > 0.0) as u8 as f64, (v[1] > 0.0) as u8 as f64))
            .unzip();
        let e = cov_estimate(&a, &b);
        assert!(e.within(target, 4.0), "{e:?} vs {target}");
    }

    #[test]
    fn empirical_covariance_matrix() {
        let cov = vec![vec![2.0, -0.3, 0.1], vec![-0.3, 1.0, -0.2], vec![0.1, -0.2, 0.5]];
        let spec = CovarianceSpec::new(vec![1.0, 0.0, -1.0], cov.clone()).unwrap();
        let xs = draws(&spec, 100_000, 3);
        for i in 0..3 {
            for j in 0..3 {
                let a: Vec<f64> = xs.iter().map(|v| v[i]).collect();
                let b: Vec<f64> = xs.iter().map(|v| v[j]).collect();
                assert!(cov_estimate(&a, &b).within(cov[i][j], 5.0), "({i},{j})");
            }
        }
    }
}
