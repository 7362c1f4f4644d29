//! Command-line entry point. One subcommand per experiment kind plus the
//! full suite, the weights manifest, and baseline freezing/comparison.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 config validation error,
//! 3 invariant violation or baseline regression.

use biparam_harness::baseline::{BaselineVerdict, Baselines};
use biparam_harness::config::{ExperimentConfig, ExperimentKind, WeightSpec};
use biparam_harness::corpus::weights_manifest_json;
use biparam_harness::experiments::{run_experiment_labeled, SweepReport};
use biparam_harness::report::write_outputs;
use biparam_harness::suite::{freeze_suite, run_suite};
use biparam_sparse::operators::Complexity;
use biparam_sparse::Error;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "biparam-harness", about = "Sparse-domination experiment harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Martingale-transform domination trials.
    MartingaleDomination(RunArgs),
    /// Cancellative-shift domination trials over the complexity sweep.
    ShiftDomination(RunArgs),
    /// Weighted operator-norm trials against the A₂^8 bound.
    WeightedNorm(RunArgs),
    /// One-parameter weak (1,1) ratio trials.
    WeakType(RunArgs),
    /// Stopping-time sparse-bound trials.
    OneparamSparse(RunArgs),
    /// Rectangle covering selection and verification trials.
    Covering(RunArgs),
    /// One martingale experiment averaged over shifted grids.
    GridAverage(RunArgs),
    /// Every kind with reference parameters; the baseline-freezing run.
    Suite(SuiteArgs),
    /// Emit the named weight corpus manifest as JSON.
    WeightsManifest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid depth, "5,5" or a single value for both axes (1-D kinds use the
    /// first entry).
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Shift complexity "i1,i2,j1,j2".
    #[arg(long)]
    complexity: Option<String>,
    /// "max_magnitude_random_sign" or "haar_of_identity".
    #[arg(long)]
    generator: Option<String>,
    /// Weight: corpus member name or grid-function file path.
    #[arg(long)]
    weight: Option<String>,
    /// Rectangle family size for covering experiments.
    #[arg(long)]
    rects: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write this run's aggregates as the new frozen baseline.
    #[arg(long)]
    freeze_baseline: bool,
    #[arg(long)]
    baseline: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    freeze_baseline: bool,
    #[arg(long)]
    baseline: Option<PathBuf>,
}

fn parse_depth(s: &str) -> Result<(u8, u8), Error> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Error::InvalidParameter(format!("depth '{s}' is not 'dx,dy' or 'd'"));
    match parts.as_slice() {
        [one] => {
            let d: u8 = one.trim().parse().map_err(|_| bad())?;
            Ok((d, d))
        }
        [a, b] => Ok((
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn parse_complexity(s: &str) -> Result<Complexity, Error> {
    let nums: Vec<u8> = s
        .split(',')
        .map(|p| p.trim().parse::<u8>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::InvalidParameter(format!("complexity '{s}' is not 'i1,i2,j1,j2'")))?;
    if nums.len() != 4 {
        return Err(Error::InvalidParameter(format!(
            "complexity '{s}' needs four entries"
        )));
    }
    Ok(Complexity::new(nums[0], nums[1], nums[2], nums[3]))
}

fn build_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Format(format!("config {}: {e}", path.display())))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            cfg.kind = kind;
            cfg
        }
        None => ExperimentConfig::for_kind(kind),
    };
    if let Some(depth) = &args.depth {
        let (dx, dy) = parse_depth(depth)?;
        cfg.depth_x = dx;
        cfg.depth_y = dy;
        cfg.depth_1d = dx;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(b) = args.beta {
        cfg.beta = b;
    }
    if let Some(c) = args.c {
        cfg.c = c;
    }
    if let Some(c1) = args.c1 {
        cfg.c1 = c1;
    }
    if let Some(c2) = args.c2 {
        cfg.c2 = c2;
    }
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(comp) = &args.complexity {
        cfg.complexity = parse_complexity(comp)?;
    }
    if let Some(g) = &args.generator {
        cfg.generator = g.clone();
    }
    if let Some(w) = &args.weight {
        let looks_like_path = std::path::Path::new(w).exists();
        cfg.weight = if looks_like_path {
            WeightSpec::File(PathBuf::from(w))
        } else {
            WeightSpec::Named(w.clone())
        };
    }
    if let Some(r) = args.rects {
        cfg.rect_count = r;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = Some(out.clone());
    }
    Ok(cfg)
}

/// Exit-code mapping per the documented contract.
fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::Format(_) => ExitCode::from(1),
        Error::InvalidParameter(_) | Error::GridMismatch(_) | Error::ResolutionExceeded { .. } => {
            ExitCode::from(2)
        }
        _ => ExitCode::from(3),
    }
}

fn baseline_step(
    reports: &[SweepReport],
    freeze: bool,
    path: &Option<PathBuf>,
) -> Result<Option<BaselineVerdict>, Error> {
    let Some(path) = path else {
        return Ok(None);
    };
    if freeze {
        let mut baselines = Baselines::load(path).unwrap_or_default();
        for rep in reports {
            baselines.freeze(rep);
        }
        baselines.save(path)?;
        eprintln!("baseline frozen at {}", path.display());
        return Ok(None);
    }
    let baselines = Baselines::load(path)?;
    let mut pass = true;
    let mut lines = Vec::new();
    for rep in reports {
        let v = baselines.compare(rep);
        pass &= v.pass;
        lines.extend(v.lines);
    }
    Ok(Some(BaselineVerdict { pass, lines }))
}

fn finish(
    reports: Vec<SweepReport>,
    out: Option<PathBuf>,
    freeze: bool,
    baseline: Option<PathBuf>,
) -> ExitCode {
    let verdict = match baseline_step(&reports, freeze, &baseline) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    if let Some(dir) = out {
        if let Err(e) = write_outputs(&dir, &reports, &verdict) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        eprintln!("reports written to {}", dir.display());
    }
    let mut invariant_failures = 0usize;
    for rep in &reports {
        invariant_failures += rep.aggregates.invariant_failures;
        eprintln!(
            "{}: {} trials, max ratio {:.6}, mean ratio {:.6}, min eta {:.4}, invariant failures {}",
            rep.label,
            rep.aggregates.trials,
            rep.aggregates.max_ratio,
            rep.aggregates.mean_ratio,
            rep.aggregates.min_eta,
            rep.aggregates.invariant_failures,
        );
    }
    if let Some(v) = &verdict {
        for line in &v.lines {
            eprintln!("baseline: {line}");
        }
        if !v.pass {
            eprintln!("baseline comparison FAILED");
            return ExitCode::from(3);
        }
    }
    if invariant_failures > 0 {
        eprintln!("{invariant_failures} hard invariant violations");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn run_kind(kind: ExperimentKind, args: RunArgs) -> ExitCode {
    let cfg = match build_config(kind, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run_experiment_labeled(&cfg, kind.as_str()) {
        Ok(rep) => finish(vec![rep], cfg.out_dir.clone(), args.freeze_baseline, args.baseline),
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Command::MartingaleDomination(a) => run_kind(ExperimentKind::MartingaleDomination, a),
        Command::ShiftDomination(a) => run_kind(ExperimentKind::ShiftDomination, a),
        Command::WeightedNorm(a) => run_kind(ExperimentKind::WeightedNorm, a),
        Command::WeakType(a) => run_kind(ExperimentKind::WeakType, a),
        Command::OneparamSparse(a) => run_kind(ExperimentKind::OneparamSparse, a),
        Command::Covering(a) => run_kind(ExperimentKind::Covering, a),
        Command::GridAverage(a) => run_kind(ExperimentKind::GridAverage, a),
        Command::Suite(args) => {
            let seed = args.seed.unwrap_or(7);
            match run_suite(seed) {
                Ok(reports) => {
                    if args.freeze_baseline {
                        if let Some(path) = &args.baseline {
                            let mut baselines = Baselines::load(path).unwrap_or_default();
                            if let Err(e) = freeze_suite(&reports, &mut baselines)
                                .and_then(|_| baselines.save(path))
                            {
                                eprintln!("error: {e}");
                                return exit_for(&e);
                            }
                            eprintln!("baseline frozen at {}", path.display());
                            return finish(reports, args.out, true, None);
                        }
                        eprintln!("error: --freeze-baseline needs --baseline <path>");
                        return ExitCode::from(2);
                    }
                    finish(reports, args.out, false, args.baseline)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_for(&e)
                }
            }
        }
        Command::WeightsManifest { out } => {
            let manifest = weights_manifest_json();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, manifest) {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                }
                None => println!("{manifest}"),
            }
            ExitCode::SUCCESS
        }
    }
}
