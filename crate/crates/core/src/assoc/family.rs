//! Monotone bounded test functions on count vectors.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{stream, SimRng};
use crate::stats::quantile_sorted;
use crate::{Error, Result};

/// A coordinatewise non-decreasing, bounded function of a count vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `1{x_coord >= t}`.
    Threshold { coord: usize, t: f64 },
    /// `min(Σ_{i∈coords} x_i, cap)`.
    Sum { coords: Vec<usize>, cap: f64 },
    /// `min(1, max(0, Σ w_i x_i − shift) / scale)` with `w_i >= 0`.
    Score { coords: Vec<usize>, weights: Vec<f64>, shift: f64, scale: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Threshold { coord, t } => (x[*coord] >= *t) as u8 as f64,
            TestFunction::Sum { coords, cap } => coords.iter().map(|&i| x[i]).sum::<f64>().min(*cap),
            TestFunction::Score { coords, weights, shift, scale } => {
                let s: f64 = coords.iter().zip(weights).map(|(&i, w)| w * x[i]).sum();
                ((s - shift) / scale).clamp(0.0, 1.0)
            }
        }
    }

    /// Coordinates the function depends on.
    pub fn support(&self) -> Vec<usize> {
        match self {
            TestFunction::Threshold { coord, .. } => vec![*coord],
            TestFunction::Sum { coords, .. } | TestFunction::Score { coords, .. } => coords.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TestFunction::Threshold { coord, t } => format!("1{{x{coord}>={t}}}"),
            TestFunction::Sum { coords, cap } => format!("min(sum{},{cap})", fmt_coords(coords)),
            TestFunction::Score { coords, weights, shift, scale } => {
                let terms: Vec<String> = coords.iter().zip(weights).map(|(i, w)| format!("{w:.4}*x{i}")).collect();
                format!("clip(({}-{shift:.4})/{scale:.4})", terms.join("+"))
            }
        }
    }
}

fn fmt_coords(c: &[usize]) -> String {
    let parts: Vec<String> = c.iter().map(|i| format!("x{i}")).collect();
    format!("({})", parts.join(","))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestPair {
    pub f: TestFunction,
    pub g: TestFunction,
}

/// How a family is generated from a pilot sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyRecipe {
    /// Total number of pairs.
    pub pairs: usize,
    /// Quantile levels for threshold indicators.
    pub quantiles: Vec<f64>,
    /// Upper bound on threshold pairs; the rest are random scores.
    pub max_thresholds: usize,
    /// Replicates drawn (from a separate stream) to place thresholds.
    pub pilot: usize,
}

impl Default for FamilyRecipe {
    fn default() -> Self {
        FamilyRecipe { pairs: 32, quantiles: vec![0.25, 0.5, 0.75], max_thresholds: 15, pilot: 500 }
    }
}

impl FamilyRecipe {
    pub fn validate(&self) -> Result<()> {
        if self.pairs == 0 {
            return Err(Error::config("family.pairs", "must be at least 1"));
        }
        if self.quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::config("family.quantiles", "levels must lie in [0, 1]"));
        }
        if self.pilot < 2 {
            return Err(Error::config("family.pilot", "must be at least 2"));
        }
        Ok(())
    }
}

/// A list of `(f, g)` pairs with `f` supported on `J` and `g` on `K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFunctionFamily {
    pub recipe: FamilyRecipe,
    pub seed: u64,
    pub pairs: Vec<TestPair>,
}

fn column(pilot: &[Vec<f64>], i: usize) -> Vec<f64> {
    let mut c: Vec<f64> = pilot.iter().map(|x| x[i]).collect();
    c.sort_by(f64::total_cmp);
    c
}

/// Smallest observed level `>= quantile` that is above the minimum, so the
/// indicator is not constant on the pilot. `None` for a constant column.
fn threshold_level(sorted: &[f64], q: f64) -> Option<f64> {
    let lo = sorted[0];
    let t = quantile_sorted(sorted, q);
    if t > lo {
        Some(t)
    } else {
        sorted.iter().copied().find(|&v| v > lo)
    }
}

fn score(coords: &[usize], pilot: &[Vec<f64>], rng: &mut SimRng) -> TestFunction {
    let weights: Vec<f64> = coords.iter().map(|_| rng.random::<f64>()).collect();
    let mut s: Vec<f64> = pilot.iter().map(|x| coords.iter().zip(&weights).map(|(&i, w)| w * x[i]).sum()).collect();
    s.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&s, 0.25);
    let hi = quantile_sorted(&s, 0.75);
    let spread = if hi > lo { hi - lo } else { s[s.len() - 1] - s[0] };
    let scale = if spread > 0.0 { spread } else { 1.0 };
    TestFunction::Score { coords: coords.to_vec(), weights, shift: lo, scale }
}

impl TestFunctionFamily {
    /// Builds the default family for blocks `j`, `k` from pilot count vectors.
    ///
    /// The first pair compares block totals (capped at twice the pilot
    /// maximum). Next come up to `max_thresholds` single-coordinate indicator
    /// pairs at the configured quantiles, picked at random when there are more
    /// candidates. The remaining pairs are clipped linear scores with random
    /// nonnegative weights over the whole blocks.
    pub fn generate(recipe: &FamilyRecipe, seed: u64, j: &[usize], k: &[usize], pilot: &[Vec<f64>]) -> Result<Self> {
        recipe.validate()?;
        if j.is_empty() || k.is_empty() {
            return Err(Error::param("both blocks of the split must be nonempty"));
        }
        if pilot.is_empty() {
            return Err(Error::param("empty pilot sample"));
        }
        let mut rng = stream(seed, 0);
        let mut pairs = Vec::with_capacity(recipe.pairs);

        let total_cap = |block: &[usize]| {
            let m = pilot.iter().map(|x| block.iter().map(|&i| x[i]).sum::<f64>()).fold(0.0, f64::max);
            if m > 0.0 { 2.0 * m } else { 1.0 }
        };
        pairs.push(TestPair {
            f: TestFunction::Sum { coords: j.to_vec(), cap: total_cap(j) },
            g: TestFunction::Sum { coords: k.to_vec(), cap: total_cap(k) },
        });

        let mut candidates: Vec<(usize, usize, f64, f64)> = Vec::new();
        let mut seen = BTreeSet::new();
        for &a in j {
            let ca = column(pilot, a);
            for &b in k {
                let cb = column(pilot, b);
                for &q in &recipe.quantiles {
                    if let (Some(ta), Some(tb)) = (threshold_level(&ca, q), threshold_level(&cb, q)) {
                        if seen.insert((a, b, ta.to_bits(), tb.to_bits())) {
                            candidates.push((a, b, ta, tb));
                        }
                    }
                }
            }
        }
        let room = recipe.pairs.saturating_sub(1).min(recipe.max_thresholds);
        if candidates.len() > room {
            candidates.shuffle(&mut rng);
            candidates.truncate(room);
        }
        for (a, b, ta, tb) in candidates {
            pairs.push(TestPair { f: TestFunction::Threshold { coord: a, t: ta }, g: TestFunction::Threshold { coord: b, t: tb } });
        }
        while pairs.len() < recipe.pairs {
            let f = score(j, pilot, &mut rng);
            let g = score(k, pilot, &mut rng);
            pairs.push(TestPair { f, g });
        }
        Ok(TestFunctionFamily { recipe: recipe.clone(), seed, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest};

    fn pilot(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = stream(seed, 1);
        (0..n).map(|_| (0..dim).map(|_| rng.random_range(0..5) as f64).collect()).collect()
    }

    #[test]
    fn composition() {
        let p = pilot(1, 200, 4);
        let fam = TestFunctionFamily::generate(&FamilyRecipe::default(), 3, &[0, 1], &[2, 3], &p).unwrap();
        assert_eq!(fam.len(), 32);
        assert!(matches!(fam.pairs[0].f, TestFunction::Sum { .. }));
        let thresholds = fam.pairs.iter().filter(|p| matches!(p.f, TestFunction::Threshold { .. })).count();
        assert!(thresholds > 0 && thresholds <= 15);
        for pair in &fam.pairs {
            assert!(pair.f.support().iter().all(|i| [0, 1].contains(i)));
            assert!(pair.g.support().iter().all(|i| [2, 3].contains(i)));
        }
        // same seed, same family
        assert_eq!(fam, TestFunctionFamily::generate(&FamilyRecipe::default(), 3, &[0, 1], &[2, 3], &p).unwrap());
    }

    #[test]
    fn constant_columns_get_no_thresholds() {
        let p = vec![vec![1.0, 2.0]; 10];
        let fam = TestFunctionFamily::generate(&FamilyRecipe::default(), 0, &[0], &[1], &p).unwrap();
        assert!(fam.pairs.iter().all(|p| !matches!(p.f, TestFunction::Threshold { .. })));
    }

    proptest! {
        #[test]
        fn members_are_monotone_and_bounded(seed in any::<u64>(), bump in 0usize..4, delta in 0.0f64..10.0) {
            let p = pilot(seed, 50, 4);
            let fam = TestFunctionFamily::generate(&FamilyRecipe::default(), seed, &[0, 1], &[2, 3], &p).unwrap();
            let mut rng = stream(seed, 2);
            for _ in 0..10 {
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..8.0)).collect();
                let mut y = x.clone();
                y[bump] += delta;
                for pair in &fam.pairs {
                    for f in [&pair.f, &pair.g] {
                        prop_assert!(f.eval(&x) <= f.eval(&y));
                        let v = f.eval(&y);
                        prop_assert!(v.is_finite() && v >= 0.0);
                        if let TestFunction::Sum { cap, .. } = f {
                            prop_assert!(v <= *cap);
                        } else {
                            prop_assert!(v <= 1.0);
                        }
                    }
                }
            }
        }
    }
}
