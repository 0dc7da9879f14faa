use rand::Rng;

use super::{poisson_variate, Intensity, PointConfiguration, Window};
use crate::rng::SimRng;
use crate::{Error, Result};

/// A Poisson(`mean`) count; zero mean gives zero.
pub fn poisson_count(mean: f64, rng: &mut SimRng) -> Result<u64> {
    poisson_variate(mean, rng)
}

/// Poisson process with the given intensity on `window`.
///
/// Constant and grid intensities are sampled exactly (count, then i.i.d.
/// locations per box); a rate function is sampled by thinning a homogeneous
/// process at its bound.
pub fn sample_poisson(intensity: &Intensity, window: &Window, rng: &mut SimRng) -> Result<PointConfiguration> {
    let mut out = PointConfiguration::empty(window.clone());
    match intensity {
        Intensity::Constant(rate) => {
            if !(rate.is_finite() && *rate >= 0.0) {
                return Err(Error::param("negative intensity"));
            }
            let n = poisson_variate(rate * window.volume(), rng)?;
            for _ in 0..n {
                let x = window.uniform_point(rng);
                out.push_unchecked(&x, 1.0);
            }
        }
        Intensity::Grid(g) => {
            if g.dissection().window() != window {
                return Err(Error::param("grid intensity defined on another window"));
            }
            for i in 0..g.density().len() {
                let n = poisson_variate(g.mass(i), rng)?;
                if n == 0 {
                    continue;
                }
                let cell = g.dissection().box_bounds(i);
                for _ in 0..n {
                    let x = cell.uniform_point(rng);
                    out.push_unchecked(&x, 1.0);
                }
            }
        }
        Intensity::Function { rate, bound } => {
            if !(bound.is_finite() && *bound >= 0.0) {
                return Err(Error::param("negative intensity"));
            }
            let n = poisson_variate(bound * window.volume(), rng)?;
            for _ in 0..n {
                let x = window.uniform_point(rng);
                let r = rate(&x);
                if r < 0.0 {
                    return Err(Error::param("negative intensity"));
                }
                if r > *bound {
                    return Err(Error::param(format!("rate {r} exceeds bound {bound}")));
                }
                if rng.random::<f64>() * bound < r {
                    out.push_unchecked(&x, 1.0);
                }
            }
        }
    }
    Ok(out)
}

/// `points` i.i.d. uniform locations, each kept independently with
/// probability `keep`. With `points·keep = λ|W|` this approaches a Poisson
/// process of rate `λ` as `points` grows.
pub fn sample_binomial_thinned(points: u64, keep: f64, window: &Window, rng: &mut SimRng) -> Result<PointConfiguration> {
    if !(0.0..=1.0).contains(&keep) {
        return Err(Error::param("keep probability must lie in [0, 1]"));
    }
    let mut out = PointConfiguration::empty(window.clone());
    for _ in 0..points {
        let x = window.uniform_point(rng);
        if rng.random::<f64>() < keep {
            out.push_unchecked(&x, 1.0);
        }
    }
    Ok(out)
}
