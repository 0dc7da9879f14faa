//! Truncation-stability and weak-convergence experiments.

use serde::Serialize;

use super::mctest::{draw_counts, evaluate_family, CountSampler, Split, TestReport, TestSettings, Verdict};
use super::TestFunctionFamily;
use crate::par::Execution;
use crate::rng::derive_seed;
use crate::stats::{covariance, variance};
use crate::{Error, Result};

const PILOT_SALT: u64 = 0x70696c6f74;
const FAMILY_SALT: u64 = 0x66616d696c79;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrefixResult {
    pub prefix: usize,
    pub report: TestReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub levels: Vec<PrefixResult>,
    /// No level is consistent after an earlier level was violated.
    pub stable: bool,
    pub first_violation: Option<usize>,
}

fn truncate(rows: &[Vec<f64>], m: usize) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r[..m].to_vec()).collect()
}

/// Tests the nested prefixes `X_{0..m'}` of one field, with even
/// coordinates against odd ones at every level. All levels share the same
/// replicates, so the prefixes are exact marginals of one sample.
pub fn truncation_stability_test(
    sampler: &dyn CountSampler,
    prefixes: &[usize],
    settings: &TestSettings,
    exec: Execution,
) -> Result<StabilityReport> {
    settings.validate()?;
    let dim = sampler.dim();
    if prefixes.is_empty() || prefixes.windows(2).any(|w| w[0] >= w[1]) || prefixes[0] < 2 || *prefixes.last().unwrap() > dim {
        return Err(Error::param(format!("prefixes must increase strictly within 2..={dim}")));
    }
    let pilot = draw_counts(sampler, settings.family.pilot, derive_seed(settings.seed, PILOT_SALT), exec)?;
    let samples = draw_counts(sampler, settings.replicates, settings.seed, exec)?;
    let mut levels = Vec::new();
    for &m in prefixes {
        let split = Split::alternating(m);
        let family = TestFunctionFamily::generate(
            &settings.family,
            derive_seed(settings.seed, FAMILY_SALT ^ m as u64),
            &split.j,
            &split.k,
            &truncate(&pilot, m),
        )?;
        let report = evaluate_family(&truncate(&samples, m), &split, family, settings)?;
        levels.push(PrefixResult { prefix: m, report });
    }
    let first_violation = levels.iter().find(|l| l.report.verdict == Verdict::Violated).map(|l| l.prefix);
    let stable = match first_violation {
        Some(m) => levels.iter().filter(|l| l.prefix >= m).all(|l| l.report.verdict == Verdict::Violated),
        None => true,
    };
    Ok(StabilityReport { levels, stable, first_violation })
}

/// Means and covariance matrix of a sample of count vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl Moments {
    pub fn of(samples: &[Vec<f64>]) -> Moments {
        let dim = samples.first().map_or(0, Vec::len);
        let cols: Vec<Vec<f64>> = (0..dim).map(|i| samples.iter().map(|x| x[i]).collect()).collect();
        let mean = cols.iter().map(|c| crate::par::tree_mean(c)).collect();
        let cov = (0..dim).map(|i| (0..dim).map(|j| if i == j { variance(&cols[i]) } else { covariance(&cols[i], &cols[j]) }).collect()).collect();
        Moments { mean, cov }
    }

    /// Euclidean distance between mean vectors.
    pub fn mean_distance(&self, other: &Moments) -> f64 {
        self.mean.iter().zip(&other.mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    /// `sqrt(|Δmean|² + |ΔCov|_F²)`.
    pub fn distance(&self, other: &Moments) -> f64 {
        let cov: f64 = self.cov.iter().flatten().zip(other.cov.iter().flatten()).map(|(a, b)| (a - b).powi(2)).sum();
        (self.mean_distance(other).powi(2) + cov).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageResult {
    pub label: String,
    pub moments: Moments,
    pub mean_error: f64,
    pub moment_error: f64,
    pub report: TestReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub stages: Vec<StageResult>,
    pub target: StageResult,
    /// Combined first- and second-moment error strictly decreases along the stages.
    pub moment_errors_decreasing: bool,
    pub verdicts_agree: bool,
}

/// Runs the association test along a sequence of samplers and at the target,
/// comparing count moments of every stage with those of the target.
///
/// All runs use one test-function family, generated from a pilot sample of
/// the target, so verdicts are comparable across stages.
pub fn weak_convergence_harness(
    stages: &[(String, &dyn CountSampler)],
    target: &dyn CountSampler,
    split: &Split,
    settings: &TestSettings,
    exec: Execution,
) -> Result<ConvergenceReport> {
    settings.validate()?;
    split.validate(target.dim(), settings.hypothesis)?;
    if stages.iter().any(|(_, s)| s.dim() != target.dim()) {
        return Err(Error::param("every stage must share the target's count dimension"));
    }
    let pilot = draw_counts(target, settings.family.pilot, derive_seed(settings.seed, PILOT_SALT), exec)?;
    let family = TestFunctionFamily::generate(&settings.family, derive_seed(settings.seed, FAMILY_SALT), &split.j, &split.k, &pilot)?;
    let run = |label: &str, sampler: &dyn CountSampler, salt: u64| -> Result<(Vec<Vec<f64>>, String, TestReport)> {
        let seed = derive_seed(settings.seed, salt);
        let samples = draw_counts(sampler, settings.replicates, seed, exec)?;
        let mut s = settings.clone();
        s.seed = seed;
        let report = evaluate_family(&samples, split, family.clone(), &s)?;
        Ok((samples, label.to_string(), report))
    };
    let (target_samples, _, target_report) = run("target", target, 0)?;
    let target_moments = Moments::of(&target_samples);
    let mut results = Vec::new();
    for (i, (label, sampler)) in stages.iter().enumerate() {
        let (samples, label, report) = run(label, *sampler, i as u64 + 1)?;
        let moments = Moments::of(&samples);
        results.push(StageResult {
            label,
            mean_error: moments.mean_distance(&target_moments),
            moment_error: moments.distance(&target_moments),
            moments,
            report,
        });
    }
    let moment_errors_decreasing = results.windows(2).all(|w| w[1].moment_error < w[0].moment_error);
    let verdicts_agree = results.iter().all(|r| r.report.verdict == target_report.verdict);
    Ok(ConvergenceReport {
        stages: results,
        target: StageResult { label: "target".into(), moments: target_moments, mean_error: 0.0, moment_error: 0.0, report: target_report },
        moment_errors_decreasing,
        verdicts_agree,
    })
}
