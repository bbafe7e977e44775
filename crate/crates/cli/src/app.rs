//! Command-line interface.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ridgesketch_core::dataset::{
    average_norm_normalize, generate_synthetic, Decay, LabeledDataset, SyntheticSpec,
};
use ridgesketch_core::precond::SpectrumSummary;
use ridgesketch_core::solver::{
    plain_svrg, sketched_preconditioned_svrg, ApplicationMode, Schedule, SketchOptions,
};
use ridgesketch_core::svrg::{ConvergenceTrace, SvrgConfig};
use ridgesketch_core::Error as CoreError;

use crate::bench::{
    run_convergence, run_ratio_curve, write_ratio_csv, BenchConfig, StepSelection, TUNING_EXPONENTS,
};
use crate::clock::StdClock;
use crate::corpus::{read_sparse_corpus, write_corpus_file, CorpusError};

#[derive(Debug, Parser)]
#[command(
    name = "ridgesketch",
    version,
    about = "Ridge regression with sketched preconditioning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset as a sparse corpus file.
    Gen(GenArgs),
    /// Solve one ridge problem and print the final objective and timings.
    Solve(SolveArgs),
    /// Benchmarks producing CSV.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Suboptimality per epoch for plain and sketched preconditioned SVRG.
    Converge(ConvergeArgs),
    /// Theoretical improvement ratio as a function of k.
    Ratio(RatioArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DecayArg {
    Linear,
    Quadratic,
}

impl From<DecayArg> for Decay {
    fn from(d: DecayArg) -> Self {
        match d {
            DecayArg::Linear => Decay::Linear,
            DecayArg::Quadratic => Decay::Quadratic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Dense,
    Lazy,
    Auto,
}

impl From<ModeArg> for ApplicationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Dense => ApplicationMode::Dense,
            ModeArg::Lazy => ApplicationMode::Lazy,
            ModeArg::Auto => ApplicationMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Svrg,
    SketchedSvrg,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Sparse corpus file (label idx:val ...).
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Generate a synthetic instance with this singular value decay.
    #[arg(long, value_enum)]
    pub synthetic: Option<DecayArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Seed of the synthetic instance.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// Label noise of the synthetic instance.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Divide every data point by the mean data point norm.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub synthetic: DecayArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StepArgs {
    /// Fixed step size.
    #[arg(long, conflicts_with = "tune")]
    pub eta: Option<f64>,
    /// Pick the step size from the grid 2^j / mean smoothness, j = -3..3
    /// (the default).
    #[arg(long)]
    pub tune: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub lambda: f64,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[command(flatten)]
    pub step: StepArgs,
    /// Derive epochs, epoch length and step size from the strong-convexity
    /// recipe for target accuracy --epsilon. Slow for small lambda.
    #[arg(long, conflicts_with_all = ["eta", "tune"])]
    pub theoretical: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "sketched-svrg")]
    pub method: MethodArg,
    /// Write the solution as CSV (index,weight).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub lambda: f64,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[command(flatten)]
    pub step: StepArgs,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seed: Vec<u64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    /// Inner steps per epoch (default 2(n + d)).
    #[arg(long)]
    pub epoch_length: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Eigenvalues of the correlation matrix, one per line, instead of data.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["data", "synthetic"])]
    pub eigenvalues: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub lambda: f64,
    /// Largest k in the curve.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Failure of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Runtime(_) => 2,
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) | CoreError::InvalidDimension(_) => {
                AppError::Usage(e.to_string())
            }
            other => AppError::Runtime(other.into()),
        }
    }
}

impl From<CorpusError> for AppError {
    fn from(e: CorpusError) -> Self {
        AppError::Runtime(e.into())
    }
}

impl From<io::Error> for AppError {
    fn from(e: io::Error) -> Self {
        AppError::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

pub fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Solve(args) => solve(args),
        Command::Bench(BenchCommand::Converge(args)) => converge(args),
        Command::Bench(BenchCommand::Ratio(args)) => ratio(args),
    }
}

fn load(source: &SourceArgs) -> Result<LabeledDataset, AppError> {
    let ds = match (&source.data, source.synthetic) {
        (Some(path), None) => read_sparse_corpus(path)?,
        (None, Some(decay)) => {
            let (Some(n), Some(d)) = (source.n, source.d) else {
                return Err(usage("--synthetic needs --n and --d"));
            };
            let spec =
                SyntheticSpec::new(n, d, decay.into(), source.data_seed).with_noise(source.noise);
            generate_synthetic(&spec)?
        }
        _ => {
            return Err(usage(
                "pass either --data PATH or --synthetic linear|quadratic",
            ))
        }
    };
    if source.normalize {
        Ok(average_norm_normalize(ds)?)
    } else {
        Ok(ds)
    }
}

/// Writes to `path`, or to stdout when absent.
fn with_output<F>(path: Option<&Path>, write: F) -> Result<(), AppError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| anyhow::Error::new(e).context(format!("creating {}", p.display())))?;
            let mut out = BufWriter::new(file);
            write(&mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
        }
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), AppError> {
    let spec =
        SyntheticSpec::new(args.n, args.d, args.synthetic.into(), args.seed).with_noise(args.noise);
    let ds = generate_synthetic(&spec)?;
    write_corpus_file(&args.out, &ds)?;
    println!(
        "wrote {} points in {} dimensions to {}",
        ds.n(),
        ds.d(),
        args.out.display()
    );
    Ok(())
}

fn step_grid() -> Vec<f64> {
    TUNING_EXPONENTS.map(|j| 2f64.powi(j)).collect()
}

fn final_objective(trace: &ConvergenceTrace) -> f64 {
    trace
        .last()
        .map_or(trace.initial_objective, |r| r.objective)
}

fn solve(args: SolveArgs) -> Result<(), AppError> {
    let ds = load(&args.source)?;
    let problem = ds.ridge_problem(args.lambda)?;
    let clock = StdClock::new();
    let m = 2 * (problem.n() + problem.d());
    let epochs = args.epochs;
    let schedules: Vec<Schedule> = match (args.theoretical, args.step.eta) {
        (true, _) => vec![Schedule::Theoretical {
            epsilon: args.epsilon,
            seed: args.seed,
        }],
        (false, Some(eta)) => vec![Schedule::Fixed(SvrgConfig::tuned(
            epochs, m, eta, args.seed,
        ))],
        (false, None) => step_grid()
            .into_iter()
            .map(|multiplier| Schedule::Relative {
                epochs,
                epoch_length: m,
                multiplier,
                seed: args.seed,
            })
            .collect(),
    };

    let mut best: Option<(f64, Vec<f64>, String)> = None;
    let mut last_err = None;
    for schedule in &schedules {
        let attempt = match args.method {
            MethodArg::SketchedSvrg => {
                let opts = SketchOptions::new(args.k, args.seed).with_mode(args.mode.into());
                sketched_preconditioned_svrg(&problem, &opts, schedule, &clock, None).map(|r| {
                    let d = &r.diagnostics;
                    let summary = format!(
                        "method: sketched-svrg\nrank: {} of {}\nlanczos blocks: {}\nmode: {:?}\n\
                         epochs: {}\nepoch length: {}\nstep size: {:e}\n\
                         sketch ms: {:.3}\nsetup ms: {:.3}\nsvrg ms: {:.3}",
                        d.singular_values.len(),
                        d.requested_k,
                        d.lanczos_blocks,
                        d.mode,
                        d.epochs,
                        d.epoch_length,
                        d.step_size,
                        d.sketch_ms,
                        d.setup_ms,
                        d.svrg_ms
                    );
                    (final_objective(&r.trace), r.w, summary)
                })
            }
            MethodArg::Svrg => plain_svrg(&problem, schedule, &clock, None).map(|r| {
                let summary = format!(
                    "method: svrg\nepochs: {}\nepoch length: {}\nstep size: {:e}\nsvrg ms: {:.3}",
                    r.config.epochs,
                    r.config.epoch_length,
                    r.config.step_size,
                    r.trace.last().map_or(0.0, |x| x.elapsed_ms)
                );
                (final_objective(&r.trace), r.w, summary)
            }),
        };
        match attempt {
            Ok(found) => {
                if best.as_ref().is_none_or(|b| found.0 < b.0) {
                    best = Some(found);
                }
            }
            Err(e @ CoreError::Divergence { .. }) => last_err = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    let Some((objective, w, summary)) = best else {
        return Err(last_err.expect("at least one schedule").into());
    };
    println!("{summary}");
    println!("objective: {objective:e}");
    if let Some(path) = &args.out {
        with_output(Some(path), |out| {
            writeln!(out, "index,weight")?;
            for (i, x) in w.iter().enumerate() {
                writeln!(out, "{i},{x}")?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn converge(args: ConvergeArgs) -> Result<(), AppError> {
    let ds = load(&args.source)?;
    let problem = ds.ridge_problem(args.lambda)?;
    let mut cfg = BenchConfig::new(args.lambda, args.k, args.epochs, args.seed);
    cfg.mode = args.mode.into();
    cfg.epoch_length = args.epoch_length;
    if let Some(eta) = args.step.eta {
        cfg.step = StepSelection::Fixed(eta);
    }
    let report = run_convergence(&problem, &cfg, &StdClock::new())?;
    with_output(args.out.as_deref(), |out| report.write_csv(out))
}

fn read_eigenvalues(path: &Path) -> Result<Vec<f64>, AppError> {
    let file = File::open(path)
        .map_err(|e| anyhow::Error::new(e).context(format!("opening {}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let v: f64 = text.parse().map_err(|_| {
            anyhow::anyhow!(
                "{}: line {}: invalid eigenvalue {:?}",
                path.display(),
                i + 1,
                text
            )
        })?;
        values.push(v);
    }
    Ok(values)
}

fn ratio(args: RatioArgs) -> Result<(), AppError> {
    let spectrum = match &args.eigenvalues {
        Some(path) => SpectrumSummary::new(read_eigenvalues(path)?, args.lambda)?,
        None => {
            let ds = load(&args.source)?;
            let problem = ds.ridge_problem(args.lambda)?;
            SpectrumSummary::from_data(&problem.normalized_data(), args.lambda)?
        }
    };
    let rows = run_ratio_curve(&spectrum, args.k)?;
    with_output(args.out.as_deref(), |out| write_ratio_csv(out, &rows))
}
