//! Doubly stochastic Poisson processes: mixed Poisson, Cox, permanental.

use super::{poisson_variate, sample_poisson, GridDensity, Intensity, PointConfiguration, ScalarLaw, Window};
use crate::fields::GaussianField;
use crate::rng::SimRng;
use crate::{Error, Result};

/// Poisson process with intensity `X·λ`, `X` drawn from `mixing`.
pub fn sample_mixed_poisson(
    mixing: &ScalarLaw,
    base: &Intensity,
    window: &Window,
    rng: &mut SimRng,
) -> Result<PointConfiguration> {
    let x = mixing.sample(rng);
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::param(format!("negative mixing sample {x}")));
    }
    sample_poisson(&base.scaled(x), window, rng)
}

/// A realisation of a directing random measure.
#[derive(Clone, Debug, PartialEq)]
pub enum DirectingMeasure {
    /// Weighted atoms; each atom gets a Poisson(weight) number of points at its location.
    Atoms(PointConfiguration),
    /// Gridded density.
    Density(GridDensity),
}

impl DirectingMeasure {
    pub fn total_mass(&self) -> f64 {
        match self {
            DirectingMeasure::Atoms(c) => c.total_mass(),
            DirectingMeasure::Density(g) => g.total_mass(),
        }
    }

    /// The directing measure restricted to `region`.
    pub fn restrict(&self, region: &Window) -> DirectingMeasure {
        match self {
            DirectingMeasure::Atoms(c) => DirectingMeasure::Atoms(c.restrict(region)),
            DirectingMeasure::Density(g) => DirectingMeasure::Density(g.restrict(region)),
        }
    }
}

/// Two-stage sampling: draw `Λ` from `directing`, then a Poisson process with
/// intensity measure `Λ`.
pub fn sample_cox<F>(directing: F, rng: &mut SimRng) -> Result<PointConfiguration>
where
    F: FnOnce(&mut SimRng) -> Result<DirectingMeasure>,
{
    let lambda = directing(rng)?;
    if !lambda.total_mass().is_finite() {
        return Err(Error::param("directing measure is not finite"));
    }
    match lambda {
        DirectingMeasure::Atoms(atoms) => {
            let mut out = PointConfiguration::empty(atoms.window().clone());
            for i in 0..atoms.len() {
                let n = poisson_variate(atoms.weight(i), rng)?;
                for _ in 0..n {
                    out.push_unchecked(atoms.point(i), 1.0);
                }
            }
            Ok(out)
        }
        DirectingMeasure::Density(g) => {
            let window = g.dissection().window().clone();
            sample_poisson(&Intensity::Grid(g), &window, rng)
        }
    }
}

/// Cox process directed by `Y_s μ(ds)` with `Y_s = Σ_{j=1}^{k} (X^j_s)²` for
/// `k` i.i.d. copies of a Gaussian field indexed by the grid boxes.
#[derive(Clone, Debug)]
pub struct PermanentalSpec {
    pub k: usize,
    pub field: GaussianField,
    /// `μ(box)` for every box of `grid`.
    pub base_masses: Vec<f64>,
    pub grid: crate::dissection::Dissection,
}

impl PermanentalSpec {
    pub fn new(k: usize, field: GaussianField, base_masses: Vec<f64>, grid: crate::dissection::Dissection) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be positive"));
        }
        if field.dim() != grid.len() || base_masses.len() != grid.len() {
            return Err(Error::param("field dimension and base masses must match the grid"));
        }
        if base_masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::param("base masses must be finite and nonnegative"));
        }
        let cov = field.covariance();
        let n = field.dim();
        if (0..n).any(|i| (0..n).any(|j| cov[(i, j)] < 0.0)) {
            return Err(Error::InvalidCovariance("permanental fields need entrywise nonnegative covariance".into()));
        }
        Ok(PermanentalSpec { k, field, base_masses, grid })
    }

    /// The gridded directing density for one draw of the `k` fields.
    pub fn directing(&self, rng: &mut SimRng) -> Result<DirectingMeasure> {
        let mut y = vec![0.0; self.grid.len()];
        for _ in 0..self.k {
            let x = self.field.sample(rng);
            for (acc, v) in y.iter_mut().zip(&x.values) {
                *acc += v * v;
            }
        }
        let masses = y.iter().zip(&self.base_masses).map(|(a, m)| a * m).collect();
        Ok(DirectingMeasure::Density(GridDensity::from_masses(self.grid.clone(), masses)?))
    }
}

pub fn sample_permanental(spec: &PermanentalSpec, rng: &mut SimRng) -> Result<PointConfiguration> {
    sample_cox(|r| spec.directing(r), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissection::{dyadic_dissection, gamma_counts};
    use crate::fields::CovarianceSpec;
    use crate::measures::{sample_dirichlet_process, BaseMeasure};
    use crate::rng::stream;
    use crate::stats::{cov_estimate, mean_se};

    #[test]
    fn degenerate_mixing() {
        let w = Window::unit(1);
        let zero = ScalarLaw::Constant { value: 0.0 };
        assert!(sample_mixed_poisson(&zero, &Intensity::Constant(5.0), &w, &mut stream(1, 0)).unwrap().is_empty());
        let one = ScalarLaw::Constant { value: 1.0 };
        let a = sample_mixed_poisson(&one, &Intensity::Constant(2.0), &w, &mut stream(1, 1)).unwrap();
        let b = sample_poisson(&Intensity::Constant(2.0), &w, &mut stream(1, 1)).unwrap();
        assert_eq!(a, b);
        let neg = ScalarLaw::Constant { value: -1.0 };
        assert!(sample_mixed_poisson(&neg, &Intensity::Constant(2.0), &w, &mut stream(1, 2)).is_err());
    }

    #[test]
    fn mixed_poisson_halves_covariance() {
        // law of total covariance: λ(A)λ(B)·Var X = 0.5·0.5·0.25
        let w = Window::unit(1);
        let d = dyadic_dissection(&w, 1).unwrap();
        let mix = ScalarLaw::Discrete { values: vec![0.5, 1.5], probs: vec![0.5, 0.5] };
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..100_000 {
            let c = gamma_counts(&sample_mixed_poisson(&mix, &Intensity::Constant(1.0), &w, &mut stream(2, i)).unwrap(), &d);
            a.push(c.0[0]);
            b.push(c.0[1]);
        }
        let e = cov_estimate(&a, &b);
        assert!(e.within(0.0625, 4.0), "{e:?}");
    }

    #[test]
    fn deterministic_directing_is_poisson() {
        let w = Window::unit(1);
        let d = dyadic_dissection(&w, 2).unwrap();
        let g = GridDensity::new(d, vec![2.0; 4]).unwrap();
        let mut r1 = stream(3, 0);
        let a = sample_cox(|_| Ok(DirectingMeasure::Density(g.clone())), &mut r1).unwrap();
        let b = sample_poisson(&Intensity::Grid(g), &w, &mut stream(3, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dirichlet_directed_mean_count() {
        let w = Window::unit(1);
        let base = BaseMeasure::Uniform { mass: 2.0 };
        let c = 3.0;
        let counts: Vec<f64> = (0..20_000)
            .map(|i| {
                let mut rng = stream(4, i);
                sample_cox(
                    |r| {
                        let m = sample_dirichlet_process(&base, &w, 200, r)?;
                        let scaled: Vec<f64> = m.weights().iter().map(|x| x * c).collect();
                        Ok(DirectingMeasure::Atoms(m.with_weights(scaled)?))
                    },
                    &mut rng,
                )
                .unwrap()
                .len() as f64
            })
            .collect();
        let (m, se) = mean_se(&counts);
        assert!((m - c).abs() < 4.0 * se, "{m} ± {se}");
    }

    #[test]
    fn directing_supported_on_subset() {
        let w = Window::unit(1);
        let a = Window::new(vec![0.0], vec![0.5]).unwrap();
        let d = dyadic_dissection(&w, 3).unwrap();
        let g = GridDensity::new(d, (0..8).map(|i| 1.0 + i as f64).collect()).unwrap().restrict(&a);
        for i in 0..200 {
            let c = sample_cox(|_| Ok(DirectingMeasure::Density(g.clone())), &mut stream(5, i)).unwrap();
            assert!(c.points().all(|x| x[0] < 0.5));
        }
    }

    #[test]
    fn infinite_directing_rejected() {
        let w = Window::unit(1);
        let atoms = PointConfiguration::from_weighted(w, &[vec![0.2], vec![0.6]], &[1e308, 1e308]).unwrap();
        let r = sample_cox(|_| Ok(DirectingMeasure::Atoms(atoms)), &mut stream(6, 0));
        assert!(r.is_err());
    }

    #[test]
    fn permanental_first_moment() {
        // stationary variance σ² = 2, k = 3: E N(window) = k σ² μ(window)
        let w = Window::unit(1);
        let grid = dyadic_dissection(&w, 2).unwrap();
        let mut cov = vec![vec![0.5; 4]; 4];
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] = 2.0;
        }
        let field = GaussianField::new(&CovarianceSpec::new(vec![0.0; 4], cov).unwrap()).unwrap();
        let spec = PermanentalSpec::new(3, field, vec![0.25; 4], grid).unwrap();
        let counts: Vec<f64> = (0..40_000).map(|i| sample_permanental(&spec, &mut stream(7, i)).unwrap().len() as f64).collect();
        let (m, se) = mean_se(&counts);
        assert!((m - 6.0).abs() < 4.0 * se, "{m} ± {se}");
    }

    #[test]
    fn permanental_degenerate_and_invalid() {
        let w = Window::unit(1);
        let grid = dyadic_dissection(&w, 1).unwrap();
        let zero = GaussianField::new(&CovarianceSpec::new(vec![0.0; 2], vec![vec![0.0; 2]; 2]).unwrap()).unwrap();
        let spec = PermanentalSpec::new(2, zero, vec![0.5; 2], grid.clone()).unwrap();
        assert!(sample_permanental(&spec, &mut stream(8, 0)).unwrap().is_empty());
        let neg = GaussianField::new(&CovarianceSpec::new(vec![0.0; 2], vec![vec![1.0, -0.5], vec![-0.5, 1.0]]).unwrap()).unwrap();
        assert!(PermanentalSpec::new(1, neg, vec![0.5; 2], grid).is_err());
    }

    #[test]
    fn independent_cells_are_chi_square_mixed() {
        // one cell, unit variance, k = 2, μ = 1: N | Y ~ Poisson(Y), Y ~ χ²(2)
        // so E N = 2 and Var N = E Y + Var Y = 2 + 4 = 6
        let w = Window::unit(1);
        let grid = dyadic_dissection(&w, 0).unwrap();
        let field = GaussianField::new(&CovarianceSpec::new(vec![0.0], vec![vec![1.0]]).unwrap()).unwrap();
        let spec = PermanentalSpec::new(2, field, vec![1.0], grid).unwrap();
        let counts: Vec<f64> = (0..60_000).map(|i| sample_permanental(&spec, &mut stream(9, i)).unwrap().len() as f64).collect();
        let var = crate::stats::variance(&counts);
        assert!((var - 6.0).abs() < 0.25, "{var}");
    }
}
