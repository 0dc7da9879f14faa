//! Point processes and random measures on a rectangular window.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::dissection::Dissection;
use crate::rng::SimRng;
use crate::{Error, Result};

mod area_interaction;
mod cluster;
mod cox;
mod dirichlet_process;
mod dpp;
mod ginibre;
mod mixed_sampled;
mod poisson;

pub use area_interaction::{
    sample_area_interaction, AreaInteraction, GibbsSpec, McmcParams, McmcRun, Reference,
};
pub use cluster::{sample_cluster, sample_cluster_with, EdgePolicy, Offspring};
pub use cox::{
    sample_cox, sample_mixed_poisson, sample_permanental, DirectingMeasure, PermanentalSpec,
};
pub use dirichlet_process::{sample_dirichlet_process, BaseMeasure, DP_TRUNCATION};
pub use dpp::{sample_dpp_finite, DppSampler, KernelMatrix};
pub use ginibre::{ginibre_matrix, sample_ginibre_finite};
pub use mixed_sampled::{
    is_ultra_log_concave, mark_points, sample_mixed_sampled, CountLaw, MixedSampledSpec,
};
pub use poisson::{poisson_count, sample_binomial_thinned, sample_poisson};

/// Half-open box `[lo_1, hi_1) × ... × [lo_d, hi_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let w = Window { lo, hi };
        w.validate()?;
        Ok(w)
    }

    /// `[0, 1)^d`.
    pub fn unit(dim: usize) -> Self {
        Window { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_empty() || self.lo.len() != self.hi.len() {
            return Err(Error::param("window bounds must have equal, nonzero length"));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
            return Err(Error::param("window must have positive finite volume"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v < h)
    }

    pub fn uniform_point(&self, rng: &mut SimRng) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect()
    }

    /// Maps `x` into the box by periodic wrapping on every axis.
    pub fn wrap(&self, x: &mut [f64]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            let side = h - l;
            let mut t = (*v - l).rem_euclid(side);
            if t >= side {
                t = 0.0;
            }
            *v = l + t;
        }
    }
}

/// A finite list of atoms in a window with optional nonnegative weights.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration {
    window: Window,
    coords: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl PointConfiguration {
    pub fn empty(window: Window) -> Self {
        PointConfiguration { window, coords: Vec::new(), weights: None }
    }

    pub fn from_points(window: Window, points: &[Vec<f64>]) -> Result<Self> {
        let mut c = Self::empty(window);
        for p in points {
            c.try_push(p, 1.0)?;
        }
        Ok(c)
    }

    pub fn from_weighted(window: Window, points: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::param("one weight per point"));
        }
        let mut c = Self::empty(window);
        for (p, &w) in points.iter().zip(weights) {
            c.try_push(p, w)?;
        }
        Ok(c)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim())
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn weights(&self) -> Vec<f64> {
        self.weights.clone().unwrap_or_else(|| vec![1.0; self.len()])
    }

    pub fn total_mass(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => self.len() as f64,
        }
    }

    /// Adds an atom, checking it lies in the window and the weight is valid.
    pub fn try_push(&mut self, x: &[f64], weight: f64) -> Result<()> {
        if !self.window.contains(x) {
            return Err(Error::param(format!("point {x:?} outside the window")));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::param("weights must be finite and nonnegative"));
        }
        self.push_unchecked(x, weight);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, x: &[f64], weight: f64) {
        debug_assert!(self.window.contains(x), "{x:?} outside {:?}", self.window);
        let n = self.len();
        self.coords.extend_from_slice(x);
        match (&mut self.weights, weight == 1.0) {
            (Some(w), _) => w.push(weight),
            (None, true) => {}
            (None, false) => {
                let mut w = vec![1.0; n];
                w.push(weight);
                self.weights = Some(w);
            }
        }
    }

    /// Replaces all weights.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::param("one finite nonnegative weight per point"));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// Atoms inside `region`; the window is unchanged.
    pub fn restrict(&self, region: &Window) -> PointConfiguration {
        let mut out = PointConfiguration::empty(self.window.clone());
        if self.weights.is_some() {
            out.weights = Some(Vec::new());
        }
        for i in 0..self.len() {
            if region.contains(self.point(i)) {
                out.push_unchecked(self.point(i), self.weight(i));
            }
        }
        out
    }

    /// Atoms sorted by coordinates then weight, for multiset comparisons.
    pub fn sorted_atoms(&self) -> Vec<(Vec<f64>, f64)> {
        let mut atoms: Vec<(Vec<f64>, f64)> = (0..self.len()).map(|i| (self.point(i).to_vec(), self.weight(i))).collect();
        atoms.sort_by(|a, b| {
            a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal).then(a.1.total_cmp(&b.1))
        });
        atoms
    }

    /// CSV rows `replicate_id,x1..xd,weight`.
    pub fn write_csv_rows(&self, replicate: u64, out: &mut String) {
        for i in 0..self.len() {
            out.push_str(&replicate.to_string());
            for v in self.point(i) {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", self.weight(i)));
        }
    }
}

/// Multiset union of atoms. All configurations must share one window.
pub fn superpose(configs: &[PointConfiguration]) -> Result<PointConfiguration> {
    let first = configs.first().ok_or_else(|| Error::param("nothing to superpose"))?;
    let mut out = PointConfiguration::empty(first.window.clone());
    for c in configs {
        if c.window != out.window {
            return Err(Error::param("superposed configurations must share a window"));
        }
        for i in 0..c.len() {
            out.push_unchecked(c.point(i), c.weight(i));
        }
    }
    Ok(out)
}

/// Restriction `μ_A = μ(· ∩ A)` for a box `A`.
pub fn restrict(config: &PointConfiguration, region: &Window) -> PointConfiguration {
    config.restrict(region)
}

/// A density piecewise constant on the boxes of a dyadic dissection.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    dissection: Dissection,
    density: Vec<f64>,
}

impl GridDensity {
    pub fn new(dissection: Dissection, density: Vec<f64>) -> Result<Self> {
        if density.len() != dissection.len() {
            return Err(Error::param(format!(
                "{} density values for {} boxes",
                density.len(),
                dissection.len()
            )));
        }
        if density.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("density must be finite"));
        }
        if density.iter().any(|&v| v < 0.0) {
            return Err(Error::param("negative intensity"));
        }
        Ok(GridDensity { dissection, density })
    }

    /// From per-box masses instead of densities.
    pub fn from_masses(dissection: Dissection, masses: Vec<f64>) -> Result<Self> {
        let vol = dissection.box_volume();
        Self::new(dissection, masses.into_iter().map(|m| m / vol).collect())
    }

    pub fn dissection(&self) -> &Dissection {
        &self.dissection
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.density[i] * self.dissection.box_volume()
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.density.len()).map(|i| self.mass(i)).sum()
    }

    /// Keeps only the boxes inside `region`.
    pub fn restrict(&self, region: &Window) -> GridDensity {
        let density = self
            .density
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let b = self.dissection.box_bounds(i);
                let inside = b.lo.iter().zip(&b.hi).zip(region.lo.iter().zip(&region.hi)).all(|((bl, bh), (rl, rh))| rl <= bl && bh <= rh);
                if inside { v } else { 0.0 }
            })
            .collect();
        GridDensity { dissection: self.dissection.clone(), density }
    }
}

pub type RateFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Intensity measure of a Poisson process on the window.
#[derive(Clone)]
pub enum Intensity {
    /// Constant rate times Lebesgue measure.
    Constant(f64),
    /// Piecewise constant on a dyadic grid.
    Grid(GridDensity),
    /// Arbitrary rate function bounded by `bound`; sampled by thinning.
    Function { rate: RateFn, bound: f64 },
}

impl fmt::Debug for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Intensity::Constant(r) => write!(f, "Constant({r})"),
            Intensity::Grid(g) => write!(f, "Grid(total {})", g.total_mass()),
            Intensity::Function { bound, .. } => write!(f, "Function(bound {bound})"),
        }
    }
}

impl Intensity {
    /// The same measure scaled by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Intensity {
        match self {
            Intensity::Constant(r) => Intensity::Constant(r * c),
            Intensity::Grid(g) => Intensity::Grid(GridDensity {
                dissection: g.dissection.clone(),
                density: g.density.iter().map(|v| v * c).collect(),
            }),
            Intensity::Function { rate, bound } => {
                let rate = Arc::clone(rate);
                Intensity::Function { rate: Arc::new(move |x| c * rate(x)), bound: bound * c }
            }
        }
    }

    /// Draws one location from the normalised intensity.
    pub fn sample_location(&self, window: &Window, rng: &mut SimRng) -> Result<Vec<f64>> {
        match self {
            Intensity::Constant(_) => Ok(window.uniform_point(rng)),
            Intensity::Grid(g) => {
                let total = g.total_mass();
                if total <= 0.0 {
                    return Err(Error::param("grid intensity has zero mass"));
                }
                let mut u = rng.random::<f64>() * total;
                let mut chosen = g.density.len() - 1;
                for i in 0..g.density.len() {
                    let m = g.mass(i);
                    if u < m {
                        chosen = i;
                        break;
                    }
                    u -= m;
                }
                Ok(g.dissection.box_bounds(chosen).uniform_point(rng))
            }
            Intensity::Function { rate, bound } => {
                if *bound <= 0.0 {
                    return Err(Error::param("rate bound must be positive"));
                }
                loop {
                    let x = window.uniform_point(rng);
                    let r = rate(&x);
                    if r.is_nan() || r < 0.0 || r > *bound {
                        return Err(Error::param(format!("rate {r} outside [0, {bound}] at {x:?}")));
                    }
                    if rng.random::<f64>() * bound < r {
                        return Ok(x);
                    }
                }
            }
        }
    }
}

/// A law on the nonnegative reals used for mixing variables and marks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarLaw {
    Constant { value: f64 },
    Discrete { values: Vec<f64>, probs: Vec<f64> },
    Gamma { shape: f64, scale: f64 },
    Exponential { rate: f64 },
    ChiSquare { dof: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ScalarLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ScalarLaw::Constant { value } => value.is_finite(),
            ScalarLaw::Discrete { values, probs } => {
                !values.is_empty()
                    && values.len() == probs.len()
                    && values.iter().all(|v| v.is_finite())
                    && probs.iter().all(|p| *p >= 0.0)
                    && (probs.iter().sum::<f64>() - 1.0).abs() < 1e-9
            }
            ScalarLaw::Gamma { shape, scale } => *shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite(),
            ScalarLaw::Exponential { rate } => *rate > 0.0 && rate.is_finite(),
            ScalarLaw::ChiSquare { dof } => *dof > 0.0 && dof.is_finite(),
            ScalarLaw::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid scalar law {self:?}")))
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        match self {
            ScalarLaw::Constant { value } => *value,
            ScalarLaw::Discrete { values, probs } => {
                let mut u = rng.random::<f64>();
                for (v, p) in values.iter().zip(probs) {
                    if u < *p {
                        return *v;
                    }
                    u -= p;
                }
                *values.last().unwrap()
            }
            ScalarLaw::Gamma { shape, scale } => Gamma::new(*shape, *scale).unwrap().sample(rng),
            ScalarLaw::Exponential { rate } => Exp::new(*rate).unwrap().sample(rng),
            ScalarLaw::ChiSquare { dof } => 2.0 * Gamma::new(dof / 2.0, 1.0).unwrap().sample(rng),
            ScalarLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ScalarLaw::Constant { value } => *value,
            ScalarLaw::Discrete { values, probs } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
            ScalarLaw::Gamma { shape, scale } => shape * scale,
            ScalarLaw::Exponential { rate } => 1.0 / rate,
            ScalarLaw::ChiSquare { dof } => *dof,
            ScalarLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ScalarLaw::Constant { .. } => 0.0,
            ScalarLaw::Discrete { values, probs } => {
                let m = self.mean();
                values.iter().zip(probs).map(|(v, p)| p * (v - m).powi(2)).sum()
            }
            ScalarLaw::Gamma { shape, scale } => shape * scale * scale,
            ScalarLaw::Exponential { rate } => 1.0 / (rate * rate),
            ScalarLaw::ChiSquare { dof } => 2.0 * dof,
            ScalarLaw::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
        }
    }
}

/// Poisson variate that accepts a zero mean.
pub(crate) fn poisson_variate(mean: f64, rng: &mut SimRng) -> Result<u64> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::param(format!("Poisson mean {mean} is not finite and nonnegative")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::param(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn window_validation() {
        assert!(Window::new(vec![0.0], vec![0.0]).is_err());
        assert!(Window::new(vec![0.0, 0.0], vec![1.0]).is_err());
        let w = Window::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(w.volume(), 4.0);
        assert!(w.contains(&[0.0, -1.0]));
        assert!(!w.contains(&[2.0, 0.0]));
    }

    #[test]
    fn wrap_is_half_open() {
        let w = Window::unit(1);
        for (x, want) in [(1.25, 0.25), (-0.25, 0.75), (1.0, 0.0), (0.5, 0.5)] {
            let mut v = [x];
            w.wrap(&mut v);
            assert!((v[0] - want).abs() < 1e-12, "{x} -> {}", v[0]);
        }
    }

    #[test]
    fn superpose_and_restrict_identities() {
        let w = Window::unit(1);
        let c = PointConfiguration::from_points(w.clone(), &[vec![0.1], vec![0.7], vec![0.4]]).unwrap();
        let empty = PointConfiguration::empty(w.clone());
        assert_eq!(superpose(&[empty, c.clone()]).unwrap(), c);
        let left = Window::new(vec![0.0], vec![0.5]).unwrap();
        let right = Window::new(vec![0.5], vec![1.0]).unwrap();
        let back = superpose(&[restrict(&c, &left), restrict(&c, &right)]).unwrap();
        assert_eq!(back.sorted_atoms(), c.sorted_atoms());
    }

    #[test]
    fn weights_promote_lazily() {
        let mut c = PointConfiguration::empty(Window::unit(1));
        c.try_push(&[0.1], 1.0).unwrap();
        assert!(!c.is_weighted());
        c.try_push(&[0.2], 2.5).unwrap();
        assert_eq!(c.weights(), vec![1.0, 2.5]);
        assert_eq!(c.total_mass(), 3.5);
        assert!(c.try_push(&[0.3], -1.0).is_err());
        assert!(c.try_push(&[1.3], 1.0).is_err());
    }

    #[test]
    fn scalar_law_moments() {
        let law = ScalarLaw::Discrete { values: vec![0.5, 1.5], probs: vec![0.5, 0.5] };
        law.validate().unwrap();
        assert_eq!(law.mean(), 1.0);
        assert_eq!(law.variance(), 0.25);
        let mut rng = stream(1, 0);
        let draws: Vec<f64> = (0..20_000).map(|_| ScalarLaw::ChiSquare { dof: 3.0 }.sample(&mut rng)).collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((m - 3.0).abs() < 0.1);
    }
}
