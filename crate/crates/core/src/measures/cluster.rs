use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{poisson_variate, PointConfiguration, Window};
use crate::rng::SimRng;
use crate::{Error, Result};

/// What happens to offspring translated outside the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgePolicy {
    #[default]
    Torus,
    Clip,
}

/// Offspring laws, given as displacements from the parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Offspring {
    /// A single offspring at the parent location.
    Dirac,
    /// Poisson(`mean`) offspring with i.i.d. N(0, σ²I) displacements.
    Gaussian { mean: f64, sigma: f64 },
    /// Poisson(`mean`) offspring uniform in the ball of radius `radius`.
    UniformBall { mean: f64, radius: f64 },
}

impl Offspring {
    pub fn validate(&self) -> Result<()> {
        match self {
            Offspring::Dirac => Ok(()),
            Offspring::Gaussian { mean, sigma } if *mean >= 0.0 && *sigma >= 0.0 => Ok(()),
            Offspring::UniformBall { mean, radius } if *mean >= 0.0 && *radius >= 0.0 => Ok(()),
            _ => Err(Error::param(format!("invalid offspring law {self:?}"))),
        }
    }

    pub fn mean_count(&self) -> f64 {
        match self {
            Offspring::Dirac => 1.0,
            Offspring::Gaussian { mean, .. } | Offspring::UniformBall { mean, .. } => *mean,
        }
    }

    /// Displacements of one offspring cluster.
    pub fn sample(&self, dim: usize, rng: &mut SimRng) -> Result<Vec<Vec<f64>>> {
        match self {
            Offspring::Dirac => Ok(vec![vec![0.0; dim]]),
            Offspring::Gaussian { mean, sigma } => {
                let n = poisson_variate(*mean, rng)?;
                Ok((0..n)
                    .map(|_| (0..dim).map(|_| { let z: f64 = StandardNormal.sample(rng); sigma * z }).collect::<Vec<f64>>())
                    .collect())
            }
            Offspring::UniformBall { mean, radius } => {
                let n = poisson_variate(*mean, rng)?;
                Ok((0..n).map(|_| uniform_in_ball(dim, *radius, rng)).collect())
            }
        }
    }
}

pub(crate) fn uniform_in_ball(dim: usize, radius: f64, rng: &mut SimRng) -> Vec<f64> {
    use rand::Rng;
    loop {
        let v: Vec<f64> = (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v.into_iter().map(|x| x * radius).collect();
        }
    }
}

/// Poisson cluster process: parents Poisson(`parent_rate`) on the window,
/// each replaced by an independent translated offspring cluster.
pub fn sample_cluster(
    parent_rate: f64,
    offspring: &Offspring,
    window: &Window,
    edge: EdgePolicy,
    rng: &mut SimRng,
) -> Result<PointConfiguration> {
    offspring.validate()?;
    let dim = window.dim();
    sample_cluster_with(parent_rate, |r| offspring.sample(dim, r), window, edge, rng)
}

/// [`sample_cluster`] with an arbitrary offspring sampler returning displacements.
pub fn sample_cluster_with<F>(
    parent_rate: f64,
    mut offspring: F,
    window: &Window,
    edge: EdgePolicy,
    rng: &mut SimRng,
) -> Result<PointConfiguration>
where
    F: FnMut(&mut SimRng) -> Result<Vec<Vec<f64>>>,
{
    if !(parent_rate.is_finite() && parent_rate >= 0.0) {
        return Err(Error::param("parent rate must be finite and nonnegative"));
    }
    let parents = poisson_variate(parent_rate * window.volume(), rng)?;
    let mut out = PointConfiguration::empty(window.clone());
    for _ in 0..parents {
        let centre = window.uniform_point(rng);
        for disp in offspring(rng)? {
            let mut x: Vec<f64> = centre.iter().zip(&disp).map(|(c, d)| c + d).collect();
            match edge {
                EdgePolicy::Torus => {
                    window.wrap(&mut x);
                    out.push_unchecked(&x, 1.0);
                }
                EdgePolicy::Clip => {
                    if window.contains(&x) {
                        out.push_unchecked(&x, 1.0);
                    }
                }
            }
        }
    }
    Ok(out)
}
