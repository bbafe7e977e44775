//! Convergence and ratio benchmarks with CSV output.

use std::io::{self, Write};

use ridgesketch_core::precond::{theoretical_ratio, SpectrumSummary};
use ridgesketch_core::solver::{
    plain_svrg, preconditioned_svrg, reference_minimum, sketched_preconditioner, ApplicationMode,
    ReferenceSolution, RidgeProblem, Schedule, SketchOptions,
};
use ridgesketch_core::svrg::{Clock, ConvergenceTrace, SvrgConfig};
use ridgesketch_core::{Error, Result};

/// Exponents `j` of the default step-size grid `2^j / β̂`.
pub const TUNING_EXPONENTS: std::ops::RangeInclusive<i32> = -3..=3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Svrg,
    SketchedSvrg,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Svrg, Method::SketchedSvrg];

    pub fn name(self) -> &'static str {
        match self {
            Method::Svrg => "svrg",
            Method::SketchedSvrg => "sketched-svrg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepSelection {
    /// The same absolute step size for every run.
    Fixed(f64),
    /// Best final suboptimality over `multiplier / β̂`, with `β̂` taken from
    /// the components each method optimizes.
    Tuned(Vec<f64>),
}

impl StepSelection {
    pub fn default_grid() -> Self {
        StepSelection::Tuned(TUNING_EXPONENTS.map(|j| 2f64.powi(j)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub lambda: f64,
    pub k: usize,
    pub epochs: usize,
    pub step: StepSelection,
    pub seeds: Vec<u64>,
    pub mode: ApplicationMode,
    /// Inner steps per epoch; `2(n + d)` when absent.
    pub epoch_length: Option<usize>,
}

impl BenchConfig {
    pub fn new(lambda: f64, k: usize, epochs: usize, seeds: Vec<u64>) -> Self {
        Self {
            lambda,
            k,
            epochs,
            step: StepSelection::default_grid(),
            seeds,
            mode: ApplicationMode::Auto,
            epoch_length: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        if self.seeds.is_empty() {
            return invalid("at least one seed is required".into());
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return invalid(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.epochs == 0 {
            return invalid("epochs must be at least 1".into());
        }
        match &self.step {
            StepSelection::Fixed(eta) if !(*eta > 0.0 && eta.is_finite()) => {
                invalid(format!("step size must be positive, got {eta}"))
            }
            StepSelection::Tuned(grid)
                if grid.is_empty() || grid.iter().any(|m| m.is_nan() || *m <= 0.0) =>
            {
                invalid("tuning grid must hold positive multipliers".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub method: Method,
    pub seed: u64,
    pub epoch: usize,
    pub suboptimality: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub seed: u64,
    pub step_size: f64,
    /// Epoch 0 (the start point) through the last epoch.
    pub rows: Vec<CurveRow>,
}

impl MethodRun {
    pub fn final_suboptimality(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.suboptimality)
    }

    pub fn at_epoch(&self, epoch: usize) -> Option<&CurveRow> {
        self.rows.iter().find(|r| r.epoch == epoch)
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub reference: ReferenceSolution,
    /// Ordered by method, then seed.
    pub runs: Vec<MethodRun>,
}

impl ConvergenceReport {
    pub fn run(&self, method: Method, seed: u64) -> Option<&MethodRun> {
        self.runs
            .iter()
            .find(|r| r.method == method && r.seed == seed)
    }

    pub fn rows(&self) -> impl Iterator<Item = &CurveRow> {
        self.runs.iter().flat_map(|r| r.rows.iter())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "method,seed,epoch,suboptimality,elapsed_ms")?;
        for r in self.rows() {
            writeln!(
                out,
                "{},{},{},{:e},{:.3}",
                r.method.name(),
                r.seed,
                r.epoch,
                r.suboptimality,
                r.elapsed_ms
            )?;
        }
        out.flush()
    }
}

fn curve(method: Method, seed: u64, trace: &ConvergenceTrace, offset_ms: f64) -> Vec<CurveRow> {
    let start = CurveRow {
        method,
        seed,
        epoch: 0,
        suboptimality: trace.initial_suboptimality.unwrap_or(f64::NAN),
        elapsed_ms: offset_ms,
    };
    std::iter::once(start)
        .chain(trace.records.iter().map(|r| CurveRow {
            method,
            seed,
            epoch: r.epoch,
            suboptimality: r.suboptimality.unwrap_or(f64::NAN),
            elapsed_ms: offset_ms + r.elapsed_ms,
        }))
        .collect()
}

fn schedules(cfg: &BenchConfig, m: usize, seed: u64) -> Vec<Schedule> {
    match &cfg.step {
        StepSelection::Fixed(eta) => vec![Schedule::Fixed(SvrgConfig::tuned(
            cfg.epochs, m, *eta, seed,
        ))],
        StepSelection::Tuned(grid) => grid
            .iter()
            .map(|&multiplier| Schedule::Relative {
                epochs: cfg.epochs,
                epoch_length: m,
                multiplier,
                seed,
            })
            .collect(),
    }
}

/// Keeps the candidate with the lowest final suboptimality (first wins ties);
/// diverged candidates are skipped, and if all diverge the last error is
/// returned.
fn best_of(candidates: impl Iterator<Item = Result<MethodRun>>) -> Result<MethodRun> {
    let mut best: Option<MethodRun> = None;
    let mut last_err = None;
    for c in candidates {
        match c {
            Ok(run) => {
                let better = best
                    .as_ref()
                    .is_none_or(|b| run.final_suboptimality() < b.final_suboptimality());
                if better {
                    best = Some(run);
                }
            }
            Err(e @ Error::Divergence { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.expect("at least one candidate"))
}

/// Plain and sketched preconditioned SVRG from `w = 0` on every seed, with
/// suboptimality measured against one shared reference solution. Sketched
/// rows include the preconditioner construction time in `elapsed_ms`.
pub fn run_convergence(
    problem: &RidgeProblem,
    cfg: &BenchConfig,
    clock: &dyn Clock,
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if (problem.lambda() - cfg.lambda).abs() > 1e-15 * cfg.lambda {
        return Err(Error::InvalidParameter(format!(
            "problem uses lambda {} but the benchmark asks for {}",
            problem.lambda(),
            cfg.lambda
        )));
    }
    let reference = reference_minimum(problem)?;
    let m = cfg.epoch_length.unwrap_or(2 * (problem.n() + problem.d()));
    let mut runs = Vec::with_capacity(2 * cfg.seeds.len());
    for method in Method::ALL {
        for &seed in &cfg.seeds {
            let run = match method {
                Method::Svrg => best_of(schedules(cfg, m, seed).iter().map(|s| {
                    let r = plain_svrg(problem, s, clock, Some(&reference))?;
                    Ok(MethodRun {
                        method,
                        seed,
                        step_size: r.config.step_size,
                        rows: curve(method, seed, &r.trace, 0.0),
                    })
                }))?,
                Method::SketchedSvrg => {
                    let t0 = clock.now_ms();
                    let opts = SketchOptions::new(cfg.k, seed).with_mode(cfg.mode);
                    let (_, precond) = sketched_preconditioner(problem, &opts)?;
                    let sketch_ms = clock.now_ms() - t0;
                    best_of(schedules(cfg, m, seed).iter().map(|s| {
                        let r = preconditioned_svrg(
                            problem,
                            precond.clone(),
                            cfg.mode,
                            s,
                            clock,
                            Some(&reference),
                        )?;
                        let offset = sketch_ms + r.diagnostics.setup_ms;
                        Ok(MethodRun {
                            method,
                            seed,
                            step_size: r.diagnostics.step_size,
                            rows: curve(method, seed, &r.trace, offset),
                        })
                    }))?
                }
            };
            runs.push(run);
        }
    }
    Ok(ConvergenceReport { reference, runs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub k: usize,
    pub ratio: f64,
}

/// `k, ratio` for `k = 1..=k_max`.
pub fn run_ratio_curve(spectrum: &SpectrumSummary, k_max: usize) -> Result<Vec<RatioRow>> {
    if k_max == 0 || k_max > spectrum.dim() {
        return Err(Error::InvalidParameter(format!(
            "k_max={} must lie in [1, {}]",
            k_max,
            spectrum.dim()
        )));
    }
    (1..=k_max)
        .map(|k| {
            Ok(RatioRow {
                k,
                ratio: theoretical_ratio(spectrum, k)?,
            })
        })
        .collect()
}

pub fn write_ratio_csv<W: Write>(mut out: W, rows: &[RatioRow]) -> io::Result<()> {
    writeln!(out, "k,ratio")?;
    for r in rows {
        writeln!(out, "{},{}", r.k, r.ratio)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_curve_starts_at_one() {
        let spec = SpectrumSummary::new(vec![4.0, 1.0, 0.25, 0.0625], 1e-3).unwrap();
        let rows = run_ratio_curve(&spec, 4).unwrap();
        assert_eq!(rows[0], RatioRow { k: 1, ratio: 1.0 });
        assert!(run_ratio_curve(&spec, 5).is_err());
    }

    #[test]
    fn ratio_csv_layout() {
        let mut buf = Vec::new();
        write_ratio_csv(
            &mut buf,
            &[
                RatioRow { k: 1, ratio: 1.0 },
                RatioRow { k: 2, ratio: 1.25 },
            ],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,ratio\n1,1\n2,1.25\n");
    }

    #[test]
    fn config_validation() {
        assert!(BenchConfig::new(1e-3, 2, 3, vec![]).validate().is_err());
        assert!(BenchConfig::new(0.0, 2, 3, vec![1]).validate().is_err());
        let mut cfg = BenchConfig::new(1e-3, 2, 3, vec![1]);
        cfg.step = StepSelection::Fixed(-1.0);
        assert!(cfg.validate().is_err());
    }
}
