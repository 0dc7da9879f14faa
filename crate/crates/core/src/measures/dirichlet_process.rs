use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::{PointConfiguration, Window};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Default number of stick-breaking atoms.
pub const DP_TRUNCATION: usize = 1000;

/// Finite base measure `λ` of a Dirichlet process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseMeasure {
    /// `mass` times the uniform distribution on the window.
    Uniform { mass: f64 },
    /// `Σ masses[i] δ_{locations[i]}`.
    Atoms { locations: Vec<Vec<f64>>, masses: Vec<f64> },
}

impl BaseMeasure {
    pub fn total_mass(&self) -> f64 {
        match self {
            BaseMeasure::Uniform { mass } => *mass,
            BaseMeasure::Atoms { masses, .. } => masses.iter().sum(),
        }
    }

    fn validate(&self, window: &Window) -> Result<()> {
        if let BaseMeasure::Atoms { locations, masses } = self {
            if locations.len() != masses.len() {
                return Err(Error::param("one mass per base atom"));
            }
            if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return Err(Error::param("base masses must be finite and nonnegative"));
            }
            if let Some(x) = locations.iter().find(|x| !window.contains(x)) {
                return Err(Error::param(format!("base atom {x:?} outside the window")));
            }
        }
        let total = self.total_mass();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::param(format!("base measure total mass {total} must be positive and finite")));
        }
        Ok(())
    }

    fn draw_index(&self, rng: &mut SimRng) -> usize {
        match self {
            BaseMeasure::Uniform { .. } => 0,
            BaseMeasure::Atoms { masses, .. } => {
                let mut u = rng.random::<f64>() * self.total_mass();
                for (i, m) in masses.iter().enumerate() {
                    if u < *m {
                        return i;
                    }
                    u -= m;
                }
                masses.iter().rposition(|m| *m > 0.0).unwrap()
            }
        }
    }
}

/// Dirichlet process with base `λ`, truncated to `truncation` sticks.
///
/// Stick fractions are `Beta(1, λ(W))`, built as `G₁ / (G₁ + G₂)` from Gamma
/// variables; whatever mass is left after the last stick is folded into the
/// last atom so the weights always sum to one. Atoms of an atomic base that
/// land on the same location are merged.
pub fn sample_dirichlet_process(
    base: &BaseMeasure,
    window: &Window,
    truncation: usize,
    rng: &mut SimRng,
) -> Result<PointConfiguration> {
    window.validate()?;
    base.validate(window)?;
    if truncation == 0 {
        return Err(Error::param("truncation must be at least 1"));
    }
    let theta = base.total_mass();
    let g1 = Gamma::new(1.0, 1.0).unwrap();
    let g2 = Gamma::new(theta, 1.0).map_err(|e| Error::param(e.to_string()))?;
    let mut remaining = 1.0;
    let mut atoms: Vec<(Vec<f64>, usize, f64)> = Vec::with_capacity(truncation);
    for k in 0..truncation {
        let w = if k + 1 == truncation {
            remaining
        } else {
            let a: f64 = g1.sample(rng);
            let b: f64 = g2.sample(rng);
            let v = if a + b > 0.0 { a / (a + b) } else { 0.0 };
            let w = remaining * v;
            remaining -= w;
            w
        };
        let idx = base.draw_index(rng);
        let loc = match base {
            BaseMeasure::Uniform { .. } => window.uniform_point(rng),
            BaseMeasure::Atoms { locations, .. } => locations[idx].clone(),
        };
        atoms.push((loc, idx, w));
    }
    let mut out = PointConfiguration::empty(window.clone());
    match base {
        BaseMeasure::Uniform { .. } => {
            for (loc, _, w) in &atoms {
                out.push_unchecked(loc, *w);
            }
        }
        BaseMeasure::Atoms { locations, .. } => {
            let mut per = vec![0.0; locations.len()];
            for (_, i, w) in &atoms {
                per[*i] += w;
            }
            for (loc, w) in locations.iter().zip(per) {
                if w > 0.0 {
                    out.push_unchecked(loc, w);
                }
            }
        }
    }
    // keep the weight vector explicit even when every weight happens to be 1
    let weights = out.weights();
    out.with_weights(weights)
}
