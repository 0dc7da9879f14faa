//! Monte-Carlo association tests on count vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{FamilyRecipe, Hypothesis, JointPmf, TestFunctionFamily};
use crate::dissection::{gamma_counts, Dissection};
use crate::fields::FieldSample;
use crate::measures::PointConfiguration;
use crate::par::{try_map_indexed, Execution};
use crate::rng::{derive_seed, stream, SimRng};
use crate::stats::{cov_estimate, upper_p, CovEstimate, SeMethod};
use crate::{Error, Result};

/// Smallest replicate count accepted by [`mc_association_test`].
pub const MIN_REPLICATES: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.01;
pub const CAVEAT: &str = "a consistent verdict only means no significant violation was found; it does not prove association";

const PILOT_SALT: u64 = 0x70696c6f74;
const FAMILY_SALT: u64 = 0x66616d696c79;

/// Anything that produces one count vector per replicate.
pub trait CountSampler: Sync {
    fn dim(&self) -> usize;
    fn sample_counts(&self, rng: &mut SimRng) -> Result<Vec<f64>>;
}

impl<T: CountSampler + ?Sized> CountSampler for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sample_counts(&self, rng: &mut SimRng) -> Result<Vec<f64>> {
        (**self).sample_counts(rng)
    }
}

impl<T: CountSampler + ?Sized> CountSampler for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sample_counts(&self, rng: &mut SimRng) -> Result<Vec<f64>> {
        (**self).sample_counts(rng)
    }
}

impl CountSampler for JointPmf {
    fn dim(&self) -> usize {
        JointPmf::dim(self)
    }
    fn sample_counts(&self, rng: &mut SimRng) -> Result<Vec<f64>> {
        Ok(self.sample(rng).into_iter().map(|v| v as f64).collect())
    }
}

/// Box masses `γ(M)` of a random measure over a dissection.
pub struct MeasureCounts<F> {
    pub dissection: Dissection,
    pub sampler: F,
}

impl<F> MeasureCounts<F>
where
    F: Fn(&mut SimRng) -> Result<PointConfiguration> + Sync,
{
    pub fn new(dissection: Dissection, sampler: F) -> Self {
        MeasureCounts { dissection, sampler }
    }
}

impl<F> CountSampler for MeasureCounts<F>
where
    F: Fn(&mut SimRng) -> Result<PointConfiguration> + Sync,
{
    fn dim(&self) -> usize {
        self.dissection.len()
    }
    fn sample_counts(&self, rng: &mut SimRng) -> Result<Vec<f64>> {
        Ok(gamma_counts(&(self.sampler)(rng)?, &self.dissection).0)
    }
}

/// Values of a random field over a fixed index set.
pub struct FieldCounts<F> {
    pub dim: usize,
    pub sampler: F,
}

impl<F> FieldCounts<F>
where
    F: Fn(&mut SimRng) -> Result<FieldSample> + Sync,
{
    pub fn new(dim: usize, sampler: F) -> Self {
        FieldCounts { dim, sampler }
    }
}

impl<F> CountSampler for FieldCounts<F>
where
    F: Fn(&mut SimRng) -> Result<FieldSample> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn sample_counts(&self, rng: &mut SimRng) -> Result<Vec<f64>> {
        let s = (self.sampler)(rng)?;
        if s.dim() != self.dim {
            return Err(Error::param(format!("field sample has {} coordinates, expected {}", s.dim(), self.dim)));
        }
        Ok(s.values)
    }
}

/// Draws replicate `i` from stream `(seed, i)` for `i < n`.
pub fn draw_counts(sampler: &dyn CountSampler, n: usize, seed: u64, exec: Execution) -> Result<Vec<Vec<f64>>> {
    let dim = sampler.dim();
    try_map_indexed(n, exec, |i| {
        let v = sampler.sample_counts(&mut stream(seed, i))?;
        if v.len() != dim {
            return Err(Error::param(format!("sampler returned {} coordinates, expected {dim}", v.len())));
        }
        Ok(v)
    })
}

/// Coordinate blocks `J` (for `f`) and `K` (for `g`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub j: Vec<usize>,
    pub k: Vec<usize>,
}

impl Split {
    pub fn new(j: Vec<usize>, k: Vec<usize>) -> Self {
        Split { j, k }
    }

    /// First half of the coordinates against the second half.
    pub fn halves(dim: usize) -> Self {
        Split { j: (0..dim / 2).collect(), k: (dim / 2..dim).collect() }
    }

    /// Even coordinates against odd ones.
    pub fn alternating(dim: usize) -> Self {
        Split { j: (0..dim).step_by(2).collect(), k: (1..dim).step_by(2).collect() }
    }

    pub fn validate(&self, dim: usize, hyp: Hypothesis) -> Result<()> {
        if self.j.is_empty() || self.k.is_empty() {
            return Err(Error::config("split", "both blocks must be nonempty"));
        }
        if let Some(i) = self.j.iter().chain(&self.k).find(|&&i| i >= dim) {
            return Err(Error::config("split", format!("coordinate {i} out of range for dimension {dim}")));
        }
        if hyp == Hypothesis::Negative && self.j.iter().any(|i| self.k.contains(i)) {
            return Err(Error::config("split", "blocks must be disjoint for NA"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSettings {
    pub hypothesis: Hypothesis,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub family: FamilyRecipe,
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

impl TestSettings {
    pub fn new(hypothesis: Hypothesis, replicates: usize, seed: u64) -> Self {
        TestSettings { hypothesis, replicates, seed, level: DEFAULT_LEVEL, family: FamilyRecipe::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::config("replicates", format!("must be at least {MIN_REPLICATES}")));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::config("level", "must lie in (0, 1)"));
        }
        self.family.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVerdict {
    Consistent,
    Violated,
    /// `f` or `g` was constant over the replicates.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairResult {
    pub pair_id: usize,
    pub f_desc: String,
    pub g_desc: String,
    pub estimate: f64,
    pub se: f64,
    pub se_method: SeMethod,
    pub z: f64,
    /// One-sided p-value against the hypothesis.
    pub p: f64,
    /// Bonferroni-adjusted p-value.
    pub p_adjusted: f64,
    pub verdict: PairVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub hypothesis: Hypothesis,
    pub replicates: usize,
    pub seed: u64,
    pub level: f64,
    pub split: Split,
    pub family: TestFunctionFamily,
    pub pairs: Vec<PairResult>,
    pub skipped: Vec<usize>,
    pub verdict: Verdict,
    pub caveat: &'static str,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl TestReport {
    /// Pairs in ascending adjusted p-value (skipped pairs last).
    pub fn most_significant(&self) -> Option<&PairResult> {
        self.pairs
            .iter()
            .filter(|p| p.verdict != PairVerdict::Skipped)
            .min_by(|a, b| a.p_adjusted.total_cmp(&b.p_adjusted).then(a.pair_id.cmp(&b.pair_id)))
    }

    /// `pair_id,f_desc,g_desc,estimate,se,z,p,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair_id,f_desc,g_desc,estimate,se,z,p,verdict\n");
        for r in &self.pairs {
            let verdict = match r.verdict {
                PairVerdict::Consistent => "consistent",
                PairVerdict::Violated => "violated",
                PairVerdict::Skipped => "skipped",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.pair_id,
                csv_field(&r.f_desc),
                csv_field(&r.g_desc),
                r.estimate,
                r.se,
                r.z,
                r.p,
                verdict
            ));
        }
        out
    }

    /// JSON summary; `config` is echoed verbatim.
    pub fn summary_json(&self, config: serde_json::Value) -> serde_json::Value {
        let worst = self.most_significant().map(|p| {
            serde_json::json!({ "pair_id": p.pair_id, "f": p.f_desc, "g": p.g_desc, "estimate": p.estimate, "p_adjusted": p.p_adjusted })
        });
        serde_json::json!({
            "config": config,
            "seed": self.seed,
            "hypothesis": self.hypothesis,
            "replicates": self.replicates,
            "level": self.level,
            "split": self.split,
            "family": { "recipe": self.family.recipe, "seed": self.family.seed, "pairs": self.family.pairs.len() },
            "skipped_pairs": self.skipped,
            "most_significant_pair": worst,
            "verdict": self.verdict,
            "caveat": self.caveat,
        })
    }
}

/// Estimates `Cov(f(X_J), g(X_K))` for every pair of a family built from a
/// pilot sample and tests its sign with Bonferroni-corrected one-sided z tests.
pub fn mc_association_test(sampler: &dyn CountSampler, split: &Split, settings: &TestSettings, exec: Execution) -> Result<TestReport> {
    settings.validate()?;
    split.validate(sampler.dim(), settings.hypothesis)?;
    let pilot = draw_counts(sampler, settings.family.pilot, derive_seed(settings.seed, PILOT_SALT), exec)?;
    let family = TestFunctionFamily::generate(&settings.family, derive_seed(settings.seed, FAMILY_SALT), &split.j, &split.k, &pilot)?;
    let samples = draw_counts(sampler, settings.replicates, settings.seed, exec)?;
    evaluate_family(&samples, split, family, settings)
}

/// The test on samples already drawn, with a given family.
pub fn evaluate_family(samples: &[Vec<f64>], split: &Split, family: TestFunctionFamily, settings: &TestSettings) -> Result<TestReport> {
    let mut rows: Vec<(usize, String, String, CovEstimate, bool)> = Vec::with_capacity(family.len());
    for (id, pair) in family.pairs.iter().enumerate() {
        let f: Vec<f64> = samples.iter().map(|x| pair.f.eval(x)).collect();
        let g: Vec<f64> = samples.iter().map(|x| pair.g.eval(x)).collect();
        let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
        let degenerate = samples.is_empty() || constant(&f) || constant(&g);
        rows.push((id, pair.f.describe(), pair.g.describe(), cov_estimate(&f, &g), degenerate));
    }
    let active = rows.iter().filter(|r| !r.4).count();
    if active == 0 {
        return Err(Error::DegenerateFamily);
    }
    let mut pairs = Vec::with_capacity(rows.len());
    let mut skipped = Vec::new();
    for (id, f_desc, g_desc, est, degenerate) in rows {
        let z = est.z();
        let p = match settings.hypothesis {
            Hypothesis::Negative => upper_p(z),
            Hypothesis::Positive => upper_p(-z),
        };
        let p_adjusted = (p * active as f64).min(1.0);
        let verdict = if degenerate {
            skipped.push(id);
            PairVerdict::Skipped
        } else if p_adjusted < settings.level {
            PairVerdict::Violated
        } else {
            PairVerdict::Consistent
        };
        pairs.push(PairResult { pair_id: id, f_desc, g_desc, estimate: est.estimate, se: est.se, se_method: est.method, z, p, p_adjusted, verdict });
    }
    let verdict = if pairs.iter().any(|p| p.verdict == PairVerdict::Violated) { Verdict::Violated } else { Verdict::Consistent };
    Ok(TestReport {
        hypothesis: settings.hypothesis,
        replicates: samples.len(),
        seed: settings.seed,
        level: settings.level,
        split: split.clone(),
        family,
        pairs,
        skipped,
        verdict,
        caveat: CAVEAT,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCovariance {
    pub i: usize,
    pub j: usize,
    pub estimate: CovEstimate,
}

/// Covariance estimates for every coordinate pair `i < j`.
pub fn pairwise_count_covariances(samples: &[Vec<f64>]) -> Vec<PairCovariance> {
    let dim = samples.first().map_or(0, Vec::len);
    let cols: Vec<Vec<f64>> = (0..dim).map(|i| samples.iter().map(|x| x[i]).collect()).collect();
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            out.push(PairCovariance { i, j, estimate: cov_estimate(&cols[i], &cols[j]) });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf_test(pmf: &JointPmf, hyp: Hypothesis, r: usize) -> TestReport {
        let mut s = TestSettings::new(hyp, r, 11);
        s.family.pairs = 8;
        mc_association_test(pmf, &Split::new(vec![0], vec![1]), &s, Execution::default()).unwrap()
    }

    #[test]
    fn detects_positive_dependence() {
        let pmf = JointPmf::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        assert_eq!(pmf_test(&pmf, Hypothesis::Negative, 5000).verdict, Verdict::Violated);
        assert_eq!(pmf_test(&pmf, Hypothesis::Positive, 5000).verdict, Verdict::Consistent);
    }

    #[test]
    fn degenerate_family() {
        let pmf = JointPmf::new(vec![2, 2], vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let s = TestSettings::new(Hypothesis::Negative, 1000, 1);
        assert!(matches!(
            mc_association_test(&pmf, &Split::new(vec![0], vec![1]), &s, Execution::Sequential),
            Err(Error::DegenerateFamily)
        ));
    }

    #[test]
    fn preconditions() {
        let pmf = JointPmf::product(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let s = TestSettings::new(Hypothesis::Negative, 999, 1);
        assert!(mc_association_test(&pmf, &Split::new(vec![0], vec![1]), &s, Execution::Sequential).is_err());
        let s = TestSettings::new(Hypothesis::Negative, 1000, 1);
        assert!(mc_association_test(&pmf, &Split::new(vec![0], vec![0]), &s, Execution::Sequential).is_err());
        assert!(mc_association_test(&pmf, &Split::new(vec![0], vec![2]), &s, Execution::Sequential).is_err());
        assert!(mc_association_test(&pmf, &Split::new(vec![0], vec![0, 1]), &TestSettings::new(Hypothesis::Positive, 1000, 1), Execution::Sequential).is_ok());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let pmf = JointPmf::new(vec![3, 2], vec![0.1, 0.2, 0.15, 0.15, 0.3, 0.1]).unwrap();
        let s = TestSettings::new(Hypothesis::Negative, 2000, 5);
        let split = Split::new(vec![0], vec![1]);
        let a = mc_association_test(&pmf, &split, &s, Execution::Sequential).unwrap();
        let b = mc_association_test(&pmf, &split, &s, Execution::Parallel).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_field("min(sum(x0,x1),3)"), "\"min(sum(x0,x1),3)\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn split_helpers() {
        assert_eq!(Split::halves(4), Split::new(vec![0, 1], vec![2, 3]));
        assert_eq!(Split::alternating(5), Split::new(vec![0, 2, 4], vec![1, 3]));
    }
}
