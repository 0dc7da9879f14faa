use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::poset::ProductPoset;
use crate::rng::SimRng;
use crate::{Error, Result};

/// Largest number of states a [`JointPmf`] may have.
pub const STATE_CAP: usize = 4096;

/// Explicit probability table for a vector `(X_1, ..., X_n)` with
/// `X_i ∈ {0, ..., levels[i] − 1}` ordered as a chain.
///
/// States are numbered in mixed radix with the first coordinate most
/// significant, matching [`ProductPoset::of_chains`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointPmf {
    levels: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(levels: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let pmf = JointPmf { levels, probs };
        pmf.validate()?;
        Ok(pmf)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.contains(&0) {
            return Err(Error::InvalidDistribution("every coordinate needs at least one level".into()));
        }
        let states = self.levels.iter().try_fold(1usize, |acc, &l| acc.checked_mul(l)).unwrap_or(usize::MAX);
        if states > STATE_CAP {
            return Err(Error::StateSpaceCap { states, cap: STATE_CAP });
        }
        if self.probs.len() != states {
            return Err(Error::InvalidDistribution(format!("{} probabilities for {states} states", self.probs.len())));
        }
        if self.probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidDistribution("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(())
    }

    /// Parses `{"levels": [...], "probs": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let pmf: JointPmf = serde_json::from_str(text)?;
        pmf.validate()?;
        Ok(pmf)
    }

    /// Independent coordinates with the given marginals.
    pub fn product(marginals: &[Vec<f64>]) -> Result<Self> {
        let levels: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let poset = ProductPoset::of_chains(&levels)?;
        let probs = (0..poset.len()).map(|s| poset.coords(s).iter().enumerate().map(|(i, &v)| marginals[i][v]).product()).collect();
        Self::new(levels, probs)
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn states(&self) -> usize {
        self.probs.len()
    }

    pub fn poset(&self) -> ProductPoset {
        ProductPoset::of_chains(&self.levels).expect("validated levels")
    }

    pub fn coords(&self, state: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        let mut rest = state;
        for (slot, &l) in out.iter_mut().zip(&self.levels).rev() {
            *slot = rest % l;
            rest /= l;
        }
        out
    }

    /// Mixed-radix index of the sub-vector `coords` over the coordinates `idx`.
    pub(crate) fn sub_index(&self, coords: &[usize], idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.levels[i] + coords[i])
    }

    /// Law of `(X_i)_{i ∈ idx}`, coordinates in the order given.
    pub fn marginal(&self, idx: &[usize]) -> Result<JointPmf> {
        self.check_indices(idx)?;
        let levels: Vec<usize> = idx.iter().map(|&i| self.levels[i]).collect();
        let mut probs = vec![0.0; levels.iter().product()];
        for (s, p) in self.probs.iter().enumerate() {
            probs[self.sub_index(&self.coords(s), idx)] += p;
        }
        Ok(JointPmf { levels, probs })
    }

    /// `table[a][b] = P(X_J = a, X_K = b)`.
    pub(crate) fn split_table(&self, j: &[usize], k: &[usize]) -> Vec<Vec<f64>> {
        let nj: usize = j.iter().map(|&i| self.levels[i]).product();
        let nk: usize = k.iter().map(|&i| self.levels[i]).product();
        let mut t = vec![vec![0.0; nk]; nj];
        for (s, p) in self.probs.iter().enumerate() {
            let c = self.coords(s);
            t[self.sub_index(&c, j)][self.sub_index(&c, k)] += p;
        }
        t
    }

    pub(crate) fn check_indices(&self, idx: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.dim()];
        for &i in idx {
            if i >= self.dim() || seen[i] {
                return Err(Error::param(format!("coordinate {i} is out of range or repeated")));
            }
            seen[i] = true;
        }
        Ok(())
    }

    /// `E[h(X)]` for a function of the coordinate vector.
    pub fn expect(&self, h: impl Fn(&[usize]) -> f64) -> f64 {
        self.probs.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(s, p)| p * h(&self.coords(s))).sum()
    }

    pub fn sample_state(&self, rng: &mut SimRng) -> usize {
        let mut u = rng.random::<f64>();
        for (s, p) in self.probs.iter().enumerate() {
            if u < *p {
                return s;
            }
            u -= p;
        }
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }

    pub fn sample(&self, rng: &mut SimRng) -> Vec<usize> {
        self.coords(self.sample_state(rng))
    }
}
