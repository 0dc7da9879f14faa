use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use assoclab::assoc::{bk_check, exact_association_check, Hypothesis, JointPmf};
use assoclab::dominance::{decide, Dominance};
use assoclab::experiment::{
    resolve_output_dir, run_convergence, run_experiment, samples_csv, ConvergenceConfig, ExperimentConfig, ProcessSpec,
    EXIT_CONSISTENT, EXIT_ERROR, EXIT_VIOLATED,
};
use assoclab::measures::Window;
use assoclab::par::Execution;
use assoclab::poset::{DiscreteDistribution, FinitePoset};

#[derive(Parser, Debug)]
#[command(name = "assoclab", version, about = "Association experiments for random fields and random measures")]
struct Cli {
    /// Worker threads (default: available parallelism; 1 runs sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed; overrides the seed in a config file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw raw samples and print them as CSV blocks.
    Sample(SampleArgs),
    /// Run a Monte-Carlo association test from a JSON config.
    AssocTest(RunArgs),
    /// Exact NA/PA check of a joint pmf file.
    ExactCheck(ExactArgs),
    /// Decide stochastic dominance P ≼ Q on a finite poset.
    Dominance(DominanceArgs),
    /// Exhaustive BK inequality check of a pmf on {0,1}^n.
    BkCheck(BkArgs),
    /// Run the weak-convergence harness from a JSON config.
    Converge(RunArgs),
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    /// Experiment config to take the process and window from.
    #[arg(long, conflicts_with = "process")]
    config: Option<PathBuf>,
    /// Process kind, e.g. `poisson`; parameters via `--param` or `--rate`.
    #[arg(long)]
    process: Option<String>,
    /// Shorthand for `--param rate=<RATE>`.
    #[arg(long)]
    rate: Option<f64>,
    /// Process parameter `key=<json value>`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Window dimension for `--process` (unit cube).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    config: PathBuf,
    /// Output directory (default: config, then $ASSOCLAB_OUT, then ./assoclab-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[command(flatten)]
    common: Common,
    /// JSON file `{"levels": [...], "probs": [...]}`.
    pmf: PathBuf,
    #[arg(long, default_value = "NA")]
    hypothesis: String,
    /// Comma-separated block J; NA without a split checks every split.
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct DominanceArgs {
    #[command(flatten)]
    common: Common,
    /// Poset file: one label per line, `a < b` for covering relations.
    #[arg(long)]
    poset: PathBuf,
    /// Distribution file: `label,mass` (or `label mass`) per line.
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    q: PathBuf,
}

#[derive(Args, Debug)]
struct BkArgs {
    #[command(flatten)]
    common: Common,
    pmf: PathBuf,
}

fn provenance(out: &mut String, command: &str, seed: Option<u64>, inputs: &[(&str, String)]) {
    out.push_str(&format!("# assoclab {} {command}\n", env!("CARGO_PKG_VERSION")));
    if let Some(s) = seed {
        out.push_str(&format!("# seed={s}\n"));
    }
    for (k, v) in inputs {
        out.push_str(&format!("# {k}={v}\n"));
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn sample(args: &SampleArgs, exec: Execution) -> Result<i32> {
    let (spec, window, depth, seed) = match (&args.config, &args.process) {
        (Some(path), _) => {
            let c = ExperimentConfig::load(path)?;
            (c.process, c.window, c.depth, args.common.seed.unwrap_or(c.seed))
        }
        (None, Some(kind)) => {
            let mut obj = serde_json::Map::new();
            obj.insert("kind".into(), kind.clone().into());
            if let Some(r) = args.rate {
                obj.insert("rate".into(), r.into());
            }
            for p in &args.params {
                let (k, v) = p.split_once('=').with_context(|| format!("--param `{p}` is not KEY=VALUE"))?;
                let v = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.to_string()));
                obj.insert(k.to_string(), v);
            }
            let spec: ProcessSpec = serde_json::from_value(obj.into()).context("invalid process parameters")?;
            (spec, Window::unit(args.dim), 0, args.common.seed.unwrap_or(0))
        }
        (None, None) => bail!("give --config or --process"),
    };
    let process = spec.build(&window, depth)?;
    let mut out = String::new();
    provenance(
        &mut out,
        "sample",
        Some(seed),
        &[
            ("process", serde_json::to_string(&spec)?),
            ("window", serde_json::to_string(&window)?),
            ("replicates", args.replicates.to_string()),
        ],
    );
    out.push_str(&samples_csv(&process, args.replicates, seed, exec)?);
    emit(&out, args.out.as_deref())?;
    Ok(EXIT_CONSISTENT)
}

fn assoc_test(args: &RunArgs, exec: Execution) -> Result<i32> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.common.seed {
        config.seed = s;
    }
    // validate before touching the output directory
    config.prepare()?;
    let dir = resolve_output_dir(config.output.dir.as_deref(), args.out.as_deref());
    let outcome = run_experiment(&config, &dir, exec)?;
    let r = &outcome.report;
    println!("{} test: {} ({} pairs, {} skipped, seed {})", r.hypothesis, r.verdict, r.pairs.len(), r.skipped.len(), r.seed);
    if let Some(p) = r.most_significant() {
        println!("most significant pair {}: f = {}, g = {}, cov = {:.6}, z = {:.3}", p.pair_id, p.f_desc, p.g_desc, p.estimate, p.z);
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.exit_code)
}

fn converge(args: &RunArgs, exec: Execution) -> Result<i32> {
    let mut config = ConvergenceConfig::load(&args.config)?;
    if let Some(s) = args.common.seed {
        config.seed = s;
    }
    let dir = resolve_output_dir(config.output.dir.as_deref(), args.out.as_deref());
    let outcome = run_convergence(&config, &dir, exec)?;
    for s in outcome.report.stages.iter().chain(std::iter::once(&outcome.report.target)) {
        println!("{}: mean error {:.6}, moment error {:.6}, {}", s.label, s.mean_error, s.moment_error, s.report.verdict);
    }
    println!("moment errors decreasing: {}", outcome.report.moment_errors_decreasing);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.exit_code)
}

fn exact_check(args: &ExactArgs) -> Result<i32> {
    let pmf = JointPmf::from_json(&read(&args.pmf)?)?;
    let hyp: Hypothesis = args.hypothesis.parse()?;
    let splits: Vec<Vec<usize>> = match (&args.split, hyp) {
        (Some(s), _) => vec![s.clone()],
        (None, Hypothesis::Positive) => vec![vec![]],
        (None, Hypothesis::Negative) => {
            let n = pmf.dim();
            if n < 2 {
                bail!("NA needs at least two coordinates");
            }
            // J and its complement give the same check; keep J ∌ n − 1
            (1u32..(1 << (n - 1))).map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect()).collect()
        }
    };
    let mut out = String::new();
    provenance(&mut out, "exact-check", args.common.seed, &[("pmf", args.pmf.display().to_string())]);
    let mut holds = true;
    let mut pairs = 0;
    let mut failure = None;
    for s in &splits {
        let v = exact_association_check(&pmf, s, hyp)?;
        pairs += v.pairs_checked;
        if !v.holds {
            holds = false;
            failure = v.witness;
            break;
        }
    }
    out.push_str(&format!("{hyp}: {}\n", if holds { "holds" } else { "fails" }));
    out.push_str(&format!("# splits={} pairs={pairs}\n", splits.len()));
    if let Some(w) = failure {
        out.push_str(&format!("witness J={:?} K={:?} U={:?} V={:?} cov={:.12}\n", w.j, w.k, w.u, w.v, w.covariance));
    }
    emit(&out, None)?;
    Ok(if holds { EXIT_CONSISTENT } else { EXIT_VIOLATED })
}

fn parse_distribution(text: &str, poset: &Arc<FinitePoset>, path: &Path) -> Result<DiscreteDistribution> {
    let mut masses = vec![None; poset.len()];
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let (Some(label), Some(mass), None) = (parts.next(), parts.next(), parts.next()) else {
            bail!("{}:{}: expected `label mass`", path.display(), n + 1);
        };
        let idx = poset.index_of(label).with_context(|| format!("{}:{}: unknown element `{label}`", path.display(), n + 1))?;
        let m: f64 = mass.parse().with_context(|| format!("{}:{}: bad mass `{mass}`", path.display(), n + 1))?;
        if masses[idx].replace(m).is_some() {
            bail!("{}:{}: duplicate element `{label}`", path.display(), n + 1);
        }
    }
    Ok(DiscreteDistribution::new(poset, masses.into_iter().map(|m| m.unwrap_or(0.0)).collect())?)
}

fn dominance(args: &DominanceArgs) -> Result<i32> {
    let poset = Arc::new(FinitePoset::parse(&read(&args.poset)?)?);
    let p = parse_distribution(&read(&args.p)?, &poset, &args.p)?;
    let q = parse_distribution(&read(&args.q)?, &poset, &args.q)?;
    let mut out = String::new();
    provenance(
        &mut out,
        "dominance",
        args.common.seed,
        &[("poset", args.poset.display().to_string()), ("p", args.p.display().to_string()), ("q", args.q.display().to_string())],
    );
    let code = match decide(&p, &q, &poset)? {
        Dominance::Holds(c) => {
            out.push_str("P <= Q: holds\n");
            out.push_str(&c.to_csv(&poset));
            EXIT_CONSISTENT
        }
        Dominance::Fails(w) => {
            out.push_str(&format!("P <= Q: fails (gap {:.12})\n", w.gap));
            out.push_str(&w.to_csv(&poset));
            EXIT_VIOLATED
        }
    };
    emit(&out, None)?;
    Ok(code)
}

fn bk(args: &BkArgs) -> Result<i32> {
    let pmf = JointPmf::from_json(&read(&args.pmf)?)?;
    let v = bk_check(&pmf)?;
    let mut out = String::new();
    provenance(&mut out, "bk-check", args.common.seed, &[("pmf", args.pmf.display().to_string())]);
    out.push_str(&format!("BK: {}\n# pairs={}\n", if v.holds { "holds" } else { "fails" }, v.pairs_checked));
    if let Some(w) = &v.witness {
        out.push_str(&format!("witness A={:?} B={:?} P(A□B)={} P(A)P(B)={}\n", w.a, w.b, w.p_box, w.p_a * w.p_b));
    }
    emit(&out, None)?;
    Ok(if v.holds { EXIT_CONSISTENT } else { EXIT_VIOLATED })
}

fn execution(threads: Option<usize>) -> Result<Execution> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::default()),
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let exec = execution(cli.threads)?;
    match &cli.command {
        Command::Sample(a) => sample(a, exec),
        Command::AssocTest(a) => assoc_test(a, exec),
        Command::ExactCheck(a) => exact_check(a),
        Command::Dominance(a) => dominance(a),
        Command::BkCheck(a) => bk(a),
        Command::Converge(a) => converge(a, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
