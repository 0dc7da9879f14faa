use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Intensity, PointConfiguration, ScalarLaw, Window};
use crate::rng::SimRng;
use crate::{Error, Result};

/// A law on `{0, 1, 2, ...}` given by its pmf on a finite prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountLaw {
    pmf: Vec<f64>,
}

impl CountLaw {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::param("count pmf must be a nonempty list of nonnegative numbers"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("count pmf sums to {total}")));
        }
        Ok(CountLaw { pmf })
    }

    pub fn deterministic(n: usize) -> Self {
        let mut pmf = vec![0.0; n + 1];
        pmf[n] = 1.0;
        CountLaw { pmf }
    }

    pub fn binomial(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("binomial p outside [0, 1]"));
        }
        let mut pmf = vec![0.0; n + 1];
        let mut c = 1.0f64;
        for (k, slot) in pmf.iter_mut().enumerate() {
            if k > 0 {
                c *= (n - k + 1) as f64 / k as f64;
            }
            *slot = c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
        }
        Ok(CountLaw { pmf })
    }

    /// Geometric on `{0, 1, ...}` with success probability `p`, truncated at
    /// `max` with the tail folded into the last cell.
    pub fn geometric(p: f64, max: usize) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::param("geometric p outside (0, 1]"));
        }
        let mut pmf: Vec<f64> = (0..max).map(|k| p * (1.0 - p).powi(k as i32)).collect();
        pmf.push((1.0 - p).powi(max as i32));
        Ok(CountLaw { pmf })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn sample(&self, rng: &mut SimRng) -> usize {
        let mut u = rng.random::<f64>();
        for (k, p) in self.pmf.iter().enumerate() {
            if u < *p {
                return k;
            }
            u -= p;
        }
        self.pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// `k·p_k² >= (k+1)·p_{k+1}·p_{k−1}` for every `k >= 1`.
pub fn is_ultra_log_concave(law: &CountLaw) -> std::result::Result<(), usize> {
    let p = |k: usize| law.prob(k);
    for k in 1..=law.pmf.len() {
        let lhs = k as f64 * p(k) * p(k);
        let rhs = (k + 1) as f64 * p(k + 1) * p(k - 1);
        if lhs < rhs * (1.0 - 1e-12) - 1e-300 {
            return Err(k);
        }
    }
    Ok(())
}

/// `N = Σ_{i≤τ} W_i δ_{X_i}` with `X_i` i.i.d. from the normalised `spatial`
/// intensity and optional i.i.d. weights.
#[derive(Clone, Debug)]
pub struct MixedSampledSpec {
    pub tau: CountLaw,
    pub spatial: Intensity,
    pub weights: Option<ScalarLaw>,
    /// Skip the ultra log-concavity check.
    pub waive_ulc: bool,
}

impl MixedSampledSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.waive_ulc {
            is_ultra_log_concave(&self.tau).map_err(|k| Error::NotUltraLogConcave { k })?;
        }
        if let Some(w) = &self.weights {
            w.validate()?;
        }
        Ok(())
    }
}

pub fn sample_mixed_sampled(spec: &MixedSampledSpec, window: &Window, rng: &mut SimRng) -> Result<PointConfiguration> {
    spec.validate()?;
    let n = spec.tau.sample(rng);
    let mut out = PointConfiguration::empty(window.clone());
    for _ in 0..n {
        let x = spec.spatial.sample_location(window, rng)?;
        let w = match &spec.weights {
            Some(law) => law.sample(rng),
            None => 1.0,
        };
        out.try_push(&x, w)?;
    }
    Ok(out)
}

/// Independent position-dependent marking: weight `i` drawn from `kernel(x_i)`.
pub fn mark_points<K>(config: &PointConfiguration, kernel: K, rng: &mut SimRng) -> Result<PointConfiguration>
where
    K: Fn(&[f64]) -> ScalarLaw,
{
    let weights = config
        .points()
        .map(|x| {
            let law = kernel(x);
            law.validate()?;
            Ok(law.sample(rng))
        })
        .collect::<Result<Vec<f64>>>()?;
    config.clone().with_weights(weights)
}
