//! Area-interaction (Widom-Rowlinson type) Gibbs process.
//!
//! Density `e^{−α·|U(μ)|}` against a Poisson reference, with `U(μ)` the union
//! of the radius-`r` balls around the atoms. Sampling is birth-death
//! Metropolis-Hastings; the area change of one move is estimated by throwing
//! darts into the moved ball.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::cluster::uniform_in_ball;
use super::{PointConfiguration, Window};
use crate::rng::SimRng;
use crate::stats::variance;
use crate::{Error, Result};

/// Hard limit on the chain state size when no `max_points` is given.
const STATE_LIMIT: usize = 100_000;
/// |z| above which the Geweke comparison flags non-convergence.
const GEWEKE_THRESHOLD: f64 = 5.0;

/// Reference Poisson process: intensity `β` with respect to Lebesgue measure
/// on a window, or total mean `β·|W|` spread evenly over a finite site list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Reference {
    Continuous { window: Window },
    Sites { window: Window, sites: Vec<Vec<f64>> },
}

impl Reference {
    pub fn window(&self) -> &Window {
        match self {
            Reference::Continuous { window } | Reference::Sites { window, .. } => window,
        }
    }

    fn propose(&self, rng: &mut SimRng) -> Vec<f64> {
        match self {
            Reference::Continuous { window } => window.uniform_point(rng),
            Reference::Sites { sites, .. } => sites[rng.random_range(0..sites.len())].clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsSpec {
    pub beta: f64,
    pub alpha: f64,
    pub radius: f64,
    pub reference: Reference,
    /// Births beyond this many points are refused, which targets the law
    /// conditioned on `N <= max_points`.
    #[serde(default)]
    pub max_points: Option<usize>,
}

impl GibbsSpec {
    pub fn validate(&self) -> Result<()> {
        let w = self.reference.window();
        w.validate()?;
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::param("beta must be positive"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::param("alpha must be finite"));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::param("radius must be positive"));
        }
        if let Reference::Sites { sites, window } = &self.reference {
            if sites.is_empty() {
                return Err(Error::param("site list is empty"));
            }
            if let Some(s) = sites.iter().find(|s| !window.contains(s)) {
                return Err(Error::param(format!("site {s:?} outside the window")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcParams {
    pub burn_in: u64,
    pub thinning: u64,
    pub darts: usize,
    pub check_stationarity: bool,
}

impl Default for McmcParams {
    fn default() -> Self {
        McmcParams { burn_in: 100_000, thinning: 1_000, darts: 10_000, check_stationarity: true }
    }
}

/// Output of one chain.
#[derive(Clone, Debug)]
pub struct McmcRun {
    pub samples: Vec<PointConfiguration>,
    pub acceptance_rate: f64,
    /// Point count every `thinning` steps, burn-in included.
    pub trace: Vec<usize>,
    /// True when some area change was estimated by darts rather than exactly.
    pub approximate_area: bool,
}

#[derive(Clone, Debug)]
pub struct AreaInteraction {
    spec: GibbsSpec,
    ball_volume: f64,
}

impl AreaInteraction {
    pub fn new(spec: GibbsSpec) -> Result<Self> {
        spec.validate()?;
        let d = spec.reference.window().dim() as f64;
        let ball_volume = std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0) * spec.radius.powf(d);
        Ok(AreaInteraction { spec, ball_volume })
    }

    pub fn spec(&self) -> &GibbsSpec {
        &self.spec
    }

    /// Volume of `B(x, r)` not covered by the balls around `others`.
    fn exclusive_volume(&self, x: &[f64], others: &[&[f64]], darts: usize, approx: &mut bool, rng: &mut SimRng) -> f64 {
        let r = self.spec.radius;
        let near: Vec<&[f64]> = others.iter().copied().filter(|y| dist2(x, y) < 4.0 * r * r).collect();
        if near.is_empty() {
            return self.ball_volume;
        }
        if near.iter().any(|y| dist2(x, y) == 0.0) {
            return 0.0;
        }
        *approx = true;
        let mut free = 0usize;
        for _ in 0..darts {
            let off = uniform_in_ball(x.len(), r, rng);
            let p: Vec<f64> = x.iter().zip(&off).map(|(a, b)| a + b).collect();
            if near.iter().all(|y| dist2(&p, y) > r * r) {
                free += 1;
            }
        }
        self.ball_volume * free as f64 / darts.max(1) as f64
    }

    pub fn run(&self, params: &McmcParams, samples: usize, rng: &mut SimRng) -> Result<McmcRun> {
        if params.thinning == 0 {
            return Err(Error::param("thinning must be at least 1"));
        }
        if self.spec.alpha != 0.0 && params.darts == 0 {
            return Err(Error::param("dart count must be at least 1"));
        }
        let window = self.spec.reference.window();
        let mass = self.spec.beta * window.volume();
        let cap = self.spec.max_points.unwrap_or(usize::MAX);
        let alpha = self.spec.alpha;
        let mut state: Vec<Vec<f64>> = Vec::new();
        let mut approx = false;
        let mut accepted = 0u64;
        let total_steps = params.burn_in + samples as u64 * params.thinning;
        let mut trace = Vec::new();
        let mut out = Vec::with_capacity(samples);
        for step in 1..=total_steps {
            let n = state.len();
            if rng.random::<f64>() < 0.5 {
                let u = self.spec.reference.propose(rng);
                if n < cap {
                    let delta = if alpha == 0.0 {
                        0.0
                    } else {
                        let others: Vec<&[f64]> = state.iter().map(Vec::as_slice).collect();
                        self.exclusive_volume(&u, &others, params.darts, &mut approx, rng)
                    };
                    let ratio = mass / (n + 1) as f64 * (-alpha * delta).exp();
                    if rng.random::<f64>() < ratio {
                        if n >= STATE_LIMIT {
                            return Err(Error::param(format!("chain exceeded {STATE_LIMIT} points; set max_points")));
                        }
                        state.push(u);
                        accepted += 1;
                    }
                }
            } else if n > 0 {
                let i = rng.random_range(0..n);
                let delta = if alpha == 0.0 {
                    0.0
                } else {
                    let others: Vec<&[f64]> =
                        state.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.as_slice()).collect();
                    self.exclusive_volume(&state[i], &others, params.darts, &mut approx, rng)
                };
                let ratio = n as f64 / mass * (alpha * delta).exp();
                if rng.random::<f64>() < ratio {
                    state.swap_remove(i);
                    accepted += 1;
                }
            }
            if step % params.thinning == 0 {
                trace.push(state.len());
                if step > params.burn_in {
                    out.push(PointConfiguration::from_points(window.clone(), &state)?);
                }
            }
        }
        if params.check_stationarity {
            let start = (params.burn_in / params.thinning / 2) as usize;
            if let Some(z) = geweke_z(&trace[start.min(trace.len())..]) {
                if z.abs() > GEWEKE_THRESHOLD {
                    return Err(Error::NonConvergence(format!("Geweke z = {z:.2} on the point count")));
                }
            }
        }
        Ok(McmcRun {
            samples: out,
            acceptance_rate: accepted as f64 / total_steps.max(1) as f64,
            trace,
            approximate_area: approx,
        })
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Geweke comparison of the first 10% against the last 50% of a trace.
fn geweke_z(trace: &[usize]) -> Option<f64> {
    if trace.len() < 20 {
        return None;
    }
    let n = trace.len();
    let a: Vec<f64> = trace[..n / 10].iter().map(|&v| v as f64).collect();
    let b: Vec<f64> = trace[n / 2..].iter().map(|&v| v as f64).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let diff = mean(&a) - mean(&b);
    let s = (variance(&a) / a.len() as f64 + variance(&b) / b.len() as f64).sqrt();
    Some(if s > 0.0 {
        diff / s
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    })
}

/// One approximate draw: the state after burn-in plus one thinning interval.
pub fn sample_area_interaction(spec: &GibbsSpec, params: &McmcParams, rng: &mut SimRng) -> Result<PointConfiguration> {
    let mut run = AreaInteraction::new(spec.clone())?.run(params, 1, rng)?;
    Ok(run.samples.pop().expect("one sample requested"))
}
