//! Symmetric exclusion process on a finite site set.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::FieldSample;
use crate::rng::SimRng;
use crate::{Error, Result};

/// Sites are `0..p.len()`. A particle at `x` jumps to an empty `y` at rate
/// `p[x][y]`; initial occupations are independent Bernoulli(`alpha[x]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExclusionSpec {
    pub p: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub horizon: f64,
}

impl ExclusionSpec {
    pub fn new(p: Vec<Vec<f64>>, alpha: Vec<f64>, horizon: f64) -> Result<Self> {
        let s = ExclusionSpec { p, alpha, horizon };
        s.validate()?;
        Ok(s)
    }

    pub fn sites(&self) -> usize {
        self.p.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.p.len();
        if n == 0 || self.p.iter().any(|r| r.len() != n) {
            return Err(Error::param("transition matrix must be square and nonempty"));
        }
        if self.alpha.len() != n || self.alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::param("one occupation probability in [0, 1] per site"));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::param("horizon must be finite and nonnegative"));
        }
        for (x, row) in self.p.iter().enumerate() {
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::param(format!("row {x} has a negative or non-finite entry")));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::param(format!("row {x} does not sum to 1")));
            }
            for y in 0..x {
                if (self.p[x][y] - self.p[y][x]).abs() > 1e-12 {
                    return Err(Error::param(format!("transition matrix not symmetric at ({x}, {y})")));
                }
            }
        }
        // connectivity of the jump graph
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for (y, s) in seen.iter_mut().enumerate() {
                if !*s && self.p[x][y] > 0.0 {
                    *s = true;
                    stack.push(y);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::param("transition matrix is not irreducible"));
        }
        Ok(())
    }
}

/// Initial state, every jump `(time, from, to)`, and the state at the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct ExclusionPath {
    pub initial: Vec<bool>,
    pub jumps: Vec<(f64, usize, usize)>,
    pub last: Vec<bool>,
}

/// Gillespie simulation up to the horizon.
pub fn simulate_exclusion_path(spec: &ExclusionSpec, rng: &mut SimRng) -> Result<ExclusionPath> {
    spec.validate()?;
    let n = spec.sites();
    let initial: Vec<bool> = spec.alpha.iter().map(|&a| rng.random::<f64>() < a).collect();
    let mut state = initial.clone();
    let mut jumps = Vec::new();
    let mut t = 0.0;
    loop {
        let mut total = 0.0;
        for x in (0..n).filter(|&x| state[x]) {
            for y in (0..n).filter(|&y| y != x && !state[y]) {
                total += spec.p[x][y];
            }
        }
        if total <= 0.0 {
            break;
        }
        t += Exp::new(total).unwrap().sample(rng);
        if t > spec.horizon {
            break;
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = None;
        'outer: for x in (0..n).filter(|&x| state[x]) {
            for y in (0..n).filter(|&y| y != x && !state[y]) {
                let r = spec.p[x][y];
                if r > 0.0 {
                    pick = Some((x, y));
                    if u < r {
                        break 'outer;
                    }
                    u -= r;
                }
            }
        }
        let (x, y) = pick.expect("positive total rate");
        state[x] = false;
        state[y] = true;
        jumps.push((t, x, y));
    }
    Ok(ExclusionPath { initial, jumps, last: state })
}

/// Occupation vector (0/1) at the horizon.
pub fn simulate_exclusion(spec: &ExclusionSpec, rng: &mut SimRng) -> Result<FieldSample> {
    let path = simulate_exclusion_path(spec, rng)?;
    Ok(FieldSample::new(path.last.iter().map(|&b| b as u8 as f64).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::mean_se;

    fn ring(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|x| (0..n).map(|y| if (x + 1) % n == y || (y + 1) % n == x { 0.5 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn validation() {
        assert!(ExclusionSpec::new(vec![vec![0.0, 1.0], vec![0.5, 0.5]], vec![0.5; 2], 1.0).is_err());
        let disconnected = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(ExclusionSpec::new(disconnected, vec![0.5; 2], 1.0).is_err());
        assert!(ExclusionSpec::new(ring(4), vec![1.5; 4], 1.0).is_err());
    }

    #[test]
    fn empty_stays_empty() {
        let s = ExclusionSpec::new(ring(5), vec![0.0; 5], 10.0).unwrap();
        assert_eq!(simulate_exclusion(&s, &mut stream(1, 0)).unwrap().values, vec![0.0; 5]);
    }

    #[test]
    fn particles_are_conserved() {
        let s = ExclusionSpec::new(ring(6), vec![0.5; 6], 20.0).unwrap();
        for r in 0..50 {
            let path = simulate_exclusion_path(&s, &mut stream(2, r)).unwrap();
            let mut state = path.initial.clone();
            let count = state.iter().filter(|b| **b).count();
            for &(_, x, y) in &path.jumps {
                assert!(state[x] && !state[y]);
                state[x] = false;
                state[y] = true;
                assert_eq!(state.iter().filter(|b| **b).count(), count);
            }
            assert_eq!(state, path.last);
        }
    }

    #[test]
    fn product_bernoulli_is_invariant() {
        let s = ExclusionSpec::new(ring(4), vec![0.3; 4], 3.0).unwrap();
        let xs: Vec<Vec<f64>> = (0..20_000).map(|r| simulate_exclusion(&s, &mut stream(3, r)).unwrap().values).collect();
        for i in 0..4 {
            let col: Vec<f64> = xs.iter().map(|v| v[i]).collect();
            let (m, se) = mean_se(&col);
            assert!((m - 0.3).abs() < 4.0 * se, "site {i}: {m}");
        }
    }

    #[test]
    fn single_particle_two_sites() {
        let s = ExclusionSpec::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 0.0], 50.0).unwrap();
        let col: Vec<f64> = (0..20_000).map(|r| simulate_exclusion(&s, &mut stream(4, r)).unwrap().values[0]).collect();
        let (m, se) = mean_se(&col);
        assert!((m - 0.5).abs() < 4.0 * se);
    }
}
