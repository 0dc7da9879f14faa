//! JSON-configured batch runs.
//!
//! A config names one process, the window and dissection depth that turn
//! samples into count vectors, a split, a hypothesis and the test settings.
//! Field processes ignore the window and depth; their count vector is the
//! field itself.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assoc::{
    mc_association_test, weak_convergence_harness, ConvergenceReport, CountSampler, FamilyRecipe, Hypothesis, JointPmf,
    Split, TestReport, TestSettings, Verdict, DEFAULT_LEVEL,
};
use crate::dissection::{dyadic_dissection, gamma_counts, Dissection};
use crate::fields::{
    sample_dirichlet_sequence, sample_multinomial, sample_permutation, simulate_exclusion, CovarianceSpec, ExclusionSpec,
    FieldSample, GaussianField,
};
use crate::measures::{
    sample_binomial_thinned, sample_cluster, sample_dirichlet_process, sample_mixed_poisson, sample_mixed_sampled,
    sample_permanental, sample_poisson, AreaInteraction, BaseMeasure, CountLaw, DppSampler, EdgePolicy, GibbsSpec,
    GridDensity, Intensity, KernelMatrix, McmcParams, MixedSampledSpec, Offspring, PermanentalSpec, PointConfiguration,
    Reference, ScalarLaw, Window, DP_TRUNCATION,
};
use crate::par::{try_map_indexed, Execution};
use crate::rng::{stream, SimRng};
use crate::{Error, Result};

pub const SCHEMA: &str = "assoclab/1";
/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "ASSOCLAB_OUT";
pub const DEFAULT_OUTPUT_DIR: &str = "assoclab-out";

pub const EXIT_CONSISTENT: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;

fn default_window() -> Window {
    Window::unit(2)
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

fn default_truncation() -> usize {
    DP_TRUNCATION
}

/// Every sampler the runner knows, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Poisson { rate: f64 },
    MixedPoisson { rate: f64, mixing: ScalarLaw },
    /// `points` uniform points each kept with probability `keep`.
    BinomialThinned { points: u64, keep: f64 },
    Cluster {
        parent_rate: f64,
        offspring: Offspring,
        #[serde(default)]
        edge: EdgePolicy,
    },
    DirichletProcess {
        base: BaseMeasure,
        #[serde(default = "default_truncation")]
        truncation: usize,
    },
    /// Squared Gaussian fields on the boxes of the dissection, times a
    /// constant base density.
    Permanental { k: usize, field: CovarianceSpec, base_density: f64 },
    /// Finite DPP; give the real kernel inline or a complex kernel CSV path.
    Dpp {
        ground: Vec<Vec<f64>>,
        #[serde(default)]
        kernel: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        kernel_csv: Option<PathBuf>,
    },
    /// Eigenvalues of a `size × size` Ginibre matrix; points outside the
    /// window are not counted.
    Ginibre { size: usize },
    MixedSampled {
        tau: CountLaw,
        #[serde(default)]
        weights: Option<ScalarLaw>,
        #[serde(default)]
        waive_ulc: bool,
    },
    AreaInteraction {
        beta: f64,
        alpha: f64,
        radius: f64,
        #[serde(default)]
        max_points: Option<usize>,
        #[serde(default)]
        mcmc: McmcParams,
    },
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    DirichletSequence { alpha: Vec<f64>, truncation: usize },
    Multinomial { trials: u64, probs: Vec<f64> },
    Permutation { values: Vec<f64> },
    Exclusion { p: Vec<Vec<f64>>, alpha: Vec<f64>, horizon: f64 },
    Pmf { levels: Vec<usize>, probs: Vec<f64> },
}

/// One raw draw: a point configuration or a field vector.
#[derive(Clone, Debug, PartialEq)]
pub enum RawSample {
    Points(PointConfiguration),
    Field(FieldSample),
}

impl RawSample {
    pub fn write_csv_rows(&self, replicate: u64, out: &mut String) {
        match self {
            RawSample::Points(c) => c.write_csv_rows(replicate, out),
            RawSample::Field(f) => out.push_str(&f.csv_row(replicate)),
        }
    }
}

type RawFn = Arc<dyn Fn(&mut SimRng) -> Result<RawSample> + Send + Sync>;

/// A validated process, ready to sample.
#[derive(Clone)]
pub struct Process {
    raw: RawFn,
    dissection: Option<Dissection>,
    dim: usize,
}

impl std::fmt::Debug for Process {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Process").field("dim", &self.dim).field("dissection", &self.dissection).finish()
    }
}

impl Process {
    pub fn is_measure(&self) -> bool {
        self.dissection.is_some()
    }

    pub fn sample_raw(&self, rng: &mut SimRng) -> Result<RawSample> {
        (self.raw)(rng)
    }
}

impl CountSampler for Process {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_counts(&self, rng: &mut SimRng) -> Result<Vec<f64>> {
        match ((self.raw)(rng)?, &self.dissection) {
            (RawSample::Points(c), Some(d)) => Ok(gamma_counts(&c, d).0),
            (RawSample::Field(f), _) => Ok(f.values),
            (RawSample::Points(_), None) => unreachable!("measure processes always carry a dissection"),
        }
    }
}

fn field_process(dim: usize, f: impl Fn(&mut SimRng) -> Result<FieldSample> + Send + Sync + 'static) -> Process {
    Process { raw: Arc::new(move |r| f(r).map(RawSample::Field)), dissection: None, dim }
}

fn measure_process(
    diss: Dissection,
    f: impl Fn(&mut SimRng) -> Result<PointConfiguration> + Send + Sync + 'static,
) -> Process {
    let dim = diss.len();
    Process { raw: Arc::new(move |r| f(r).map(RawSample::Points)), dissection: Some(diss), dim }
}

fn check_rate(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, "must be finite and nonnegative"))
    }
}

fn in_field<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(field, other.to_string()),
    })
}

impl ProcessSpec {
    /// Validates parameters and builds the sampler. `window` and `depth`
    /// only matter for random measures.
    pub fn build(&self, window: &Window, depth: u32) -> Result<Process> {
        in_field("window", window.validate())?;
        let w = window.clone();
        let diss = || in_field("depth", dyadic_dissection(window, depth));
        Ok(match self.clone() {
            ProcessSpec::Poisson { rate } => {
                check_rate("process.rate", rate)?;
                measure_process(diss()?, move |r| sample_poisson(&Intensity::Constant(rate), &w, r))
            }
            ProcessSpec::MixedPoisson { rate, mixing } => {
                check_rate("process.rate", rate)?;
                in_field("process.mixing", mixing.validate())?;
                measure_process(diss()?, move |r| sample_mixed_poisson(&mixing, &Intensity::Constant(rate), &w, r))
            }
            ProcessSpec::BinomialThinned { points, keep } => {
                if !(0.0..=1.0).contains(&keep) {
                    return Err(Error::config("process.keep", "must lie in [0, 1]"));
                }
                measure_process(diss()?, move |r| sample_binomial_thinned(points, keep, &w, r))
            }
            ProcessSpec::Cluster { parent_rate, offspring, edge } => {
                check_rate("process.parent_rate", parent_rate)?;
                in_field("process.offspring", offspring.validate())?;
                measure_process(diss()?, move |r| sample_cluster(parent_rate, &offspring, &w, edge, r))
            }
            ProcessSpec::DirichletProcess { base, truncation } => {
                // probe once so parameter errors surface before sampling starts
                in_field("process.base", sample_dirichlet_process(&base, &w, 1, &mut stream(0, 0)).map(|_| ()))?;
                if truncation == 0 {
                    return Err(Error::config("process.truncation", "must be at least 1"));
                }
                measure_process(diss()?, move |r| sample_dirichlet_process(&base, &w, truncation, r))
            }
            ProcessSpec::Permanental { k, field, base_density } => {
                check_rate("process.base_density", base_density)?;
                let grid = diss()?;
                let gf = in_field("process.field", GaussianField::new(&field))?;
                let masses = vec![base_density * grid.box_volume(); grid.len()];
                let spec = in_field("process", PermanentalSpec::new(k, gf, masses, grid.clone()))?;
                measure_process(grid, move |r| sample_permanental(&spec, r))
            }
            ProcessSpec::Dpp { ground, kernel, kernel_csv } => {
                let k = match (kernel, kernel_csv) {
                    (Some(rows), None) => in_field("process.kernel", KernelMatrix::from_real(&rows))?,
                    (None, Some(path)) => {
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| Error::config("process.kernel_csv", format!("{}: {e}", path.display())))?;
                        in_field("process.kernel_csv", KernelMatrix::parse_csv(&text))?
                    }
                    _ => return Err(Error::config("process", "give exactly one of kernel and kernel_csv")),
                };
                let ground = in_field("process.ground", PointConfiguration::from_points(w.clone(), &ground))?;
                let sampler = in_field("process", DppSampler::new(&k, ground))?;
                measure_process(diss()?, move |r| Ok(sampler.sample(r)))
            }
            ProcessSpec::Ginibre { size } => {
                if size == 0 {
                    return Err(Error::config("process.size", "must be at least 1"));
                }
                measure_process(diss()?, move |r| crate::measures::sample_ginibre_finite(size, r))
            }
            ProcessSpec::MixedSampled { tau, weights, waive_ulc } => {
                let spec = MixedSampledSpec { tau, spatial: Intensity::Constant(1.0), weights, waive_ulc };
                in_field("process.tau", spec.validate())?;
                measure_process(diss()?, move |r| sample_mixed_sampled(&spec, &w, r))
            }
            ProcessSpec::AreaInteraction { beta, alpha, radius, max_points, mcmc } => {
                let spec = GibbsSpec { beta, alpha, radius, reference: Reference::Continuous { window: w.clone() }, max_points };
                let model = in_field("process", AreaInteraction::new(spec))?;
                if mcmc.thinning == 0 {
                    return Err(Error::config("process.mcmc.thinning", "must be at least 1"));
                }
                measure_process(diss()?, move |r| {
                    let mut run = model.run(&mcmc, 1, r)?;
                    Ok(run.samples.pop().expect("one sample"))
                })
            }
            ProcessSpec::Gaussian { mean, cov } => {
                let spec = in_field("process", CovarianceSpec::new(mean, cov))?;
                let gf = in_field("process.cov", GaussianField::new(&spec))?;
                field_process(gf.dim(), move |r| Ok(gf.sample(r)))
            }
            ProcessSpec::DirichletSequence { alpha, truncation } => {
                in_field("process.alpha", sample_dirichlet_sequence(&alpha, truncation, &mut stream(0, 0)))?;
                let dim = truncation.min(alpha.len());
                field_process(dim, move |r| sample_dirichlet_sequence(&alpha, truncation, r))
            }
            ProcessSpec::Multinomial { trials, probs } => {
                in_field("process.probs", sample_multinomial(0, &probs, &mut stream(0, 0)))?;
                let dim = probs.len();
                field_process(dim, move |r| sample_multinomial(trials, &probs, r))
            }
            ProcessSpec::Permutation { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("process.values", "must be nonempty and finite"));
                }
                let dim = values.len();
                field_process(dim, move |r| sample_permutation(&values, r))
            }
            ProcessSpec::Exclusion { p, alpha, horizon } => {
                let spec = in_field("process", ExclusionSpec::new(p, alpha, horizon))?;
                field_process(spec.sites(), move |r| simulate_exclusion(&spec, r))
            }
            ProcessSpec::Pmf { levels, probs } => {
                let pmf = in_field("process", JointPmf::new(levels, probs))?;
                let dim = pmf.dim();
                field_process(dim, move |r| Ok(FieldSample::new(pmf.sample(r).into_iter().map(|v| v as f64).collect())))
            }
        })
    }
}

/// How the count coordinates are split into the blocks `J` and `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitSpec {
    /// First half of the coordinates (in box order) against the second half.
    Halves,
    /// Even coordinates against odd ones.
    Alternating,
    Explicit { j: Vec<usize>, k: Vec<usize> },
}

impl SplitSpec {
    pub fn resolve(&self, dim: usize) -> Split {
        match self {
            SplitSpec::Halves => Split::halves(dim),
            SplitSpec::Alternating => Split::alternating(dim),
            SplitSpec::Explicit { j, k } => Split::new(j.clone(), k.clone()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Also write every raw sample to `samples.csv`.
    #[serde(default)]
    pub samples: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub process: ProcessSpec,
    #[serde(default = "default_window")]
    pub window: Window,
    #[serde(default)]
    pub depth: u32,
    pub split: SplitSpec,
    pub hypothesis: Hypothesis,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub family: FamilyRecipe,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
            .unwrap_or("<config>")
            .to_string();
        Error::Config { field, msg }
    })
}

fn check_schema(schema: &str) -> Result<()> {
    if schema != SCHEMA {
        return Err(Error::config("schema", format!("expected \"{SCHEMA}\", found \"{schema}\"")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = parse_json(text)?;
        check_schema(&c.schema)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn settings(&self) -> TestSettings {
        TestSettings {
            hypothesis: self.hypothesis,
            replicates: self.replicates,
            seed: self.seed,
            level: self.level,
            family: self.family.clone(),
        }
    }

    /// Checks everything that can be checked without sampling.
    pub fn prepare(&self) -> Result<(Process, Split)> {
        check_schema(&self.schema)?;
        let process = self.process.build(&self.window, self.depth)?;
        let split = self.split.resolve(process.dim());
        split.validate(process.dim(), self.hypothesis)?;
        self.settings().validate()?;
        Ok((process, split))
    }
}

/// Output directory: explicit override, then the config, then
/// `$ASSOCLAB_OUT`, then `./assoclab-out`.
pub fn resolve_output_dir(config_dir: Option<&Path>, override_dir: Option<&Path>) -> PathBuf {
    override_dir
        .map(Path::to_path_buf)
        .or_else(|| config_dir.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: TestReport,
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

fn exit_for(v: Verdict) -> i32 {
    match v {
        Verdict::Consistent => EXIT_CONSISTENT,
        Verdict::Violated => EXIT_VIOLATED,
    }
}

/// Raw samples of replicates `0..n` as CSV, one block per replicate.
pub fn samples_csv(process: &Process, n: usize, seed: u64, exec: Execution) -> Result<String> {
    let raws = try_map_indexed(n, exec, |i| process.sample_raw(&mut stream(seed, i)))?;
    let mut out = String::new();
    for (i, raw) in raws.iter().enumerate() {
        out.push_str(&format!("# replicate {i}\n"));
        raw.write_csv_rows(i as u64, &mut out);
    }
    Ok(out)
}

/// Validates, runs the association test and writes `report.csv`,
/// `summary.json` and optionally `samples.csv` into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path, exec: Execution) -> Result<RunOutcome> {
    let (process, split) = config.prepare()?;
    let report = mc_association_test(&process, &split, &config.settings(), exec)?;
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let csv = out_dir.join("report.csv");
    std::fs::write(&csv, report.to_csv())?;
    files.push(csv);
    let summary = report.summary_json(serde_json::to_value(config)?);
    let json = out_dir.join("summary.json");
    std::fs::write(&json, serde_json::to_string_pretty(&summary)? + "\n")?;
    files.push(json);
    if config.output.samples {
        let path = out_dir.join("samples.csv");
        let header = if process.is_measure() { "replicate_id,x...,weight\n" } else { "replicate_id,values...\n" };
        std::fs::write(&path, format!("{header}{}", samples_csv(&process, config.replicates, config.seed, exec)?))?;
        files.push(path);
    }
    Ok(RunOutcome { exit_code: exit_for(report.verdict), report, files })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub label: String,
    pub process: ProcessSpec,
}

/// A sequence of processes converging to a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub schema: String,
    pub stages: Vec<Stage>,
    pub target: ProcessSpec,
    #[serde(default = "default_window")]
    pub window: Window,
    #[serde(default)]
    pub depth: u32,
    pub split: SplitSpec,
    pub hypothesis: Hypothesis,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub family: FamilyRecipe,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ConvergenceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ConvergenceConfig = parse_json(text)?;
        check_schema(&c.schema)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceOutcome {
    pub report: ConvergenceReport,
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

/// Runs the weak-convergence harness and writes `convergence.csv` (one row
/// per stage) and `convergence.json`.
pub fn run_convergence(config: &ConvergenceConfig, out_dir: &Path, exec: Execution) -> Result<ConvergenceOutcome> {
    check_schema(&config.schema)?;
    if config.stages.is_empty() {
        return Err(Error::config("stages", "need at least one stage"));
    }
    let target = config.target.build(&config.window, config.depth)?;
    let stages = config
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| in_field(&format!("stages[{i}]"), s.process.build(&config.window, config.depth)).map(|p| (s.label.clone(), p)))
        .collect::<Result<Vec<_>>>()?;
    let split = config.split.resolve(target.dim());
    let settings = TestSettings {
        hypothesis: config.hypothesis,
        replicates: config.replicates,
        seed: config.seed,
        level: config.level,
        family: config.family.clone(),
    };
    let refs: Vec<(String, &dyn CountSampler)> = stages.iter().map(|(l, p)| (l.clone(), p as &dyn CountSampler)).collect();
    let report = weak_convergence_harness(&refs, &target, &split, &settings, exec)?;
    std::fs::create_dir_all(out_dir)?;
    let mut csv = String::from("stage,mean_error,moment_error,verdict\n");
    for s in report.stages.iter().chain(std::iter::once(&report.target)) {
        csv.push_str(&format!("{},{},{},{}\n", s.label, s.mean_error, s.moment_error, s.report.verdict));
    }
    let csv_path = out_dir.join("convergence.csv");
    std::fs::write(&csv_path, csv)?;
    let summary = serde_json::json!({
        "config": config,
        "seed": config.seed,
        "moment_errors_decreasing": report.moment_errors_decreasing,
        "verdicts_agree": report.verdicts_agree,
        "stages": report.stages.iter().map(|s| serde_json::json!({
            "label": s.label, "mean_error": s.mean_error, "moment_error": s.moment_error, "verdict": s.report.verdict,
        })).collect::<Vec<_>>(),
        "target_verdict": report.target.report.verdict,
        "caveat": crate::assoc::CAVEAT,
    });
    let json_path = out_dir.join("convergence.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    let violated = report.stages.iter().chain(std::iter::once(&report.target)).any(|s| s.report.verdict == Verdict::Violated);
    Ok(ConvergenceOutcome {
        exit_code: if violated { EXIT_VIOLATED } else { EXIT_CONSISTENT },
        report,
        files: vec![csv_path, json_path],
    })
}

/// Wraps a grid density so configs can describe inhomogeneous intensities.
pub fn grid_intensity(diss: Dissection, density: Vec<f64>) -> Result<Intensity> {
    Ok(Intensity::Grid(GridDensity::new(diss, density)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_config() -> String {
        r#"{
            "schema": "assoclab/1",
            "process": {"kind": "poisson", "rate": 2.0},
            "window": {"lo": [0, 0], "hi": [1, 1]},
            "depth": 1,
            "split": {"kind": "halves"},
            "hypothesis": "NA",
            "replicates": 2000,
            "seed": 7
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_runs() {
        let c = ExperimentConfig::from_json(&poisson_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&c, dir.path(), Execution::default()).unwrap();
        assert_eq!(out.exit_code, EXIT_CONSISTENT);
        assert_eq!(out.files.len(), 2);
        let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out.files[1]).unwrap()).unwrap();
        // the echoed config reproduces the run
        let echoed: ExperimentConfig = serde_json::from_value(summary["config"].clone()).unwrap();
        assert_eq!(echoed, c);
    }

    #[test]
    fn unknown_fields_are_errors() {
        let text = poisson_config().replace("\"seed\": 7", "\"seed\": 7, \"sed\": 1");
        match ExperimentConfig::from_json(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "sed"),
            other => panic!("{other:?}"),
        }
        let text = poisson_config().replace("\"rate\": 2.0", "\"rate\": 2.0, \"rat\": 1");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn validation_before_sampling() {
        let text = poisson_config().replace("\"replicates\": 2000", "\"replicates\": 10");
        let c = ExperimentConfig::from_json(&text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out");
        assert!(matches!(run_experiment(&c, &target, Execution::Sequential), Err(Error::Config { .. })));
        assert!(!target.exists());
        assert!(ExperimentConfig::from_json(&poisson_config().replace("\"replicates\": 2000", "\"replicates\": -5")).is_err());
        assert!(ExperimentConfig::from_json(&poisson_config().replace("assoclab/1", "assoclab/0")).is_err());
        let bad_rate = ExperimentConfig::from_json(&poisson_config().replace("2.0", "-1.0")).unwrap();
        assert!(matches!(bad_rate.prepare(), Err(Error::Config { field, .. }) if field == "process.rate"));
    }

    #[test]
    fn every_process_kind_builds() {
        let w = Window::unit(2);
        let kinds = vec![
            r#"{"kind":"poisson","rate":1}"#,
            r#"{"kind":"mixed_poisson","rate":1,"mixing":{"law":"gamma","shape":2,"scale":0.5}}"#,
            r#"{"kind":"binomial_thinned","points":10,"keep":0.2}"#,
            r#"{"kind":"cluster","parent_rate":1,"offspring":{"kind":"gaussian","mean":2,"sigma":0.05}}"#,
            r#"{"kind":"dirichlet_process","base":{"kind":"uniform","mass":2}}"#,
            r#"{"kind":"permanental","k":1,"field":{"mean":[0,0,0,0],"cov":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]},"base_density":1}"#,
            r#"{"kind":"dpp","ground":[[0.1,0.1],[0.9,0.9]],"kernel":[[0.5,0.1],[0.1,0.5]]}"#,
            r#"{"kind":"ginibre","size":3}"#,
            r#"{"kind":"mixed_sampled","tau":[0.25,0.5,0.25]}"#,
            r#"{"kind":"area_interaction","beta":2,"alpha":0,"radius":0.1,"mcmc":{"burn_in":100,"thinning":10}}"#,
            r#"{"kind":"gaussian","mean":[0,0],"cov":[[1,0],[0,1]]}"#,
            r#"{"kind":"dirichlet_sequence","alpha":[1,1,1],"truncation":3}"#,
            r#"{"kind":"multinomial","trials":3,"probs":[0.5,0.5]}"#,
            r#"{"kind":"permutation","values":[1,2,3]}"#,
            r#"{"kind":"exclusion","p":[[0,1],[1,0]],"alpha":[0.5,0.5],"horizon":1}"#,
            r#"{"kind":"pmf","levels":[2,2],"probs":[0.25,0.25,0.25,0.25]}"#,
        ];
        for k in kinds {
            let spec: ProcessSpec = serde_json::from_str(k).unwrap_or_else(|e| panic!("{k}: {e}"));
            let p = spec.build(&w, 1).unwrap_or_else(|e| panic!("{k}: {e}"));
            let counts = p.sample_counts(&mut stream(1, 0)).unwrap();
            assert_eq!(counts.len(), p.dim(), "{k}");
        }
    }

    #[test]
    fn samples_csv_blocks() {
        let p = ProcessSpec::Poisson { rate: 2.0 }.build(&Window::unit(1), 0).unwrap();
        let csv = samples_csv(&p, 10, 3, Execution::default()).unwrap();
        assert_eq!(csv.lines().filter(|l| l.starts_with("# replicate")).count(), 10);
        assert_eq!(csv, samples_csv(&p, 10, 3, Execution::Sequential).unwrap());
    }
}
