use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::precond::Preconditioner;
use crate::sketch::{block_lanczos, LanczosConfig, SketchedSvd};
use crate::svrg::{theoretical_params, Clock, ConvergenceTrace, FiniteSum, SvrgConfig, SvrgRunner};

use super::{
    ApplicationMode, PreconditionedComponents, ReferenceSolution, RidgeComponents, RidgeProblem,
};

/// Default Block Lanczos accuracy used by the solver.
pub const SKETCH_EPS_PRIME: f64 = 0.5;

/// Epoch schedule for an SVRG run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Caller-chosen epochs, epoch length and step size.
    Fixed(SvrgConfig),
    /// Step size `multiplier / β̂`, with `β̂` the mean smoothness constant of
    /// the components being optimized.
    Relative {
        epochs: usize,
        epoch_length: usize,
        multiplier: f64,
        seed: u64,
    },
    /// Parameters from the strong-convexity recipe for target accuracy
    /// `epsilon`, using `L(0) ≥ L(0) − L*` as the initial gap.
    Theoretical { epsilon: f64, seed: u64 },
}

impl Schedule {
    fn resolve<F: FiniteSum + ?Sized>(&self, comps: &F, w0: &[f64]) -> Result<SvrgConfig> {
        match *self {
            Schedule::Fixed(cfg) => Ok(cfg),
            Schedule::Relative {
                epochs,
                epoch_length,
                multiplier,
                seed,
            } => {
                let betas = comps.betas();
                let beta_hat = betas.iter().sum::<f64>() / betas.len() as f64;
                Ok(SvrgConfig::tuned(
                    epochs,
                    epoch_length,
                    multiplier / beta_hat,
                    seed,
                ))
            }
            Schedule::Theoretical { epsilon, seed } => {
                if !(epsilon > 0.0) {
                    bail!(
                        InvalidParameter,
                        "epsilon must be positive, got {}",
                        epsilon
                    );
                }
                let gap = comps.objective(w0).max(epsilon);
                Ok(theoretical_params(comps, gap, epsilon)?.with_seed(seed))
            }
        }
    }
}

/// Options of the sketching stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchOptions {
    pub k: usize,
    pub eps_prime: f64,
    /// Seed of the Gaussian start block.
    pub seed: u64,
    pub mode: ApplicationMode,
}

impl SketchOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            eps_prime: SKETCH_EPS_PRIME,
            seed,
            mode: ApplicationMode::Auto,
        }
    }

    pub fn with_mode(mut self, mode: ApplicationMode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineDiagnostics {
    /// Approximate top singular values of `X̄`; empty when the
    /// preconditioner was supplied by the caller.
    pub singular_values: Vec<f64>,
    pub requested_k: usize,
    /// Krylov blocks used.
    pub lanczos_blocks: usize,
    /// Mean smoothness constant of the preconditioned components.
    pub beta_hat: f64,
    pub strong_convexity: f64,
    pub mode: ApplicationMode,
    pub epochs: usize,
    pub epoch_length: usize,
    pub step_size: f64,
    pub sketch_ms: f64,
    pub setup_ms: f64,
    pub svrg_ms: f64,
}

impl PipelineDiagnostics {
    /// True when the sketch returned fewer directions than requested.
    pub fn is_reduced(&self) -> bool {
        self.singular_values.len() < self.requested_k
    }
}

#[derive(Debug, Clone)]
pub struct SketchedRun {
    /// Solution in the original coordinates.
    pub w: Vec<f64>,
    /// Solution in the preconditioned coordinates.
    pub preconditioned_w: Vec<f64>,
    /// Objective and suboptimality per epoch; both refer to the original
    /// problem since `L̃(w̃) = L(P^{-1/2} w̃)`.
    pub trace: ConvergenceTrace,
    pub preconditioner: Preconditioner,
    pub diagnostics: PipelineDiagnostics,
}

/// Block Lanczos on `X̄` followed by the sketched preconditioner.
pub fn sketched_preconditioner(
    problem: &RidgeProblem,
    opts: &SketchOptions,
) -> Result<(SketchedSvd, Preconditioner)> {
    let cfg = LanczosConfig::new(opts.k, opts.eps_prime, opts.seed);
    let sketch = block_lanczos(&problem.normalized_data(), &cfg)?;
    let precond = Preconditioner::sketched(&sketch, problem.lambda())?;
    Ok((sketch, precond))
}

/// Block Lanczos on `X̄`, the sketched preconditioner, then SVRG on the
/// preconditioned components from `w̃ = 0`. The returned point is mapped back
/// with `P^{-1/2}`.
pub fn sketched_preconditioned_svrg(
    problem: &RidgeProblem,
    opts: &SketchOptions,
    schedule: &Schedule,
    clock: &dyn Clock,
    reference: Option<&ReferenceSolution>,
) -> Result<SketchedRun> {
    let t0 = clock.now_ms();
    let (sketch, precond) = sketched_preconditioner(problem, opts)?;
    let sketch_ms = clock.now_ms() - t0;
    let mut run = preconditioned_svrg(problem, precond, opts.mode, schedule, clock, reference)?;
    let d = &mut run.diagnostics;
    d.singular_values = sketch.singular_values;
    d.requested_k = sketch.requested_k;
    d.lanczos_blocks = sketch.q;
    d.sketch_ms = sketch_ms;
    Ok(run)
}

/// SVRG on the components preconditioned by `precond`, from `w̃ = 0`.
pub fn preconditioned_svrg(
    problem: &RidgeProblem,
    precond: Preconditioner,
    mode: ApplicationMode,
    schedule: &Schedule,
    clock: &dyn Clock,
    reference: Option<&ReferenceSolution>,
) -> Result<SketchedRun> {
    let t1 = clock.now_ms();
    let comps = PreconditionedComponents::new(problem, &precond, mode)?;
    let t2 = clock.now_ms();

    let w0 = vec![0.0; problem.d()];
    let svrg_cfg = schedule.resolve(&comps, &w0)?;
    let sub = |w: &[f64]| {
        reference
            .map(|r| {
                r.suboptimality(problem, &comps.to_original(w))
                    .unwrap_or(f64::NAN)
            })
            .unwrap_or(f64::NAN)
    };
    let mut runner = SvrgRunner::new(svrg_cfg).clock(clock);
    if reference.is_some() {
        runner = runner.suboptimality(&sub);
    }
    let (wt, trace) = runner.run(&comps, &w0)?;
    let svrg_ms = trace.last().map_or(0.0, |r| r.elapsed_ms);

    let betas = comps.betas();
    let diagnostics = PipelineDiagnostics {
        singular_values: Vec::new(),
        requested_k: precond.rank(),
        lanczos_blocks: 0,
        beta_hat: betas.iter().sum::<f64>() / betas.len() as f64,
        strong_convexity: comps.strong_convexity(),
        mode: comps.mode(),
        epochs: svrg_cfg.epochs,
        epoch_length: svrg_cfg.epoch_length,
        step_size: svrg_cfg.step_size,
        sketch_ms: 0.0,
        setup_ms: t2 - t1,
        svrg_ms,
    };
    let w = comps.to_original(&wt);
    Ok(SketchedRun {
        w,
        preconditioned_w: wt,
        trace,
        preconditioner: precond,
        diagnostics,
    })
}

#[derive(Debug, Clone)]
pub struct PlainRun {
    pub w: Vec<f64>,
    pub trace: ConvergenceTrace,
    pub beta_hat: f64,
    pub config: SvrgConfig,
}

/// Weighted-sampling SVRG on the unpreconditioned components from `w = 0`.
pub fn plain_svrg(
    problem: &RidgeProblem,
    schedule: &Schedule,
    clock: &dyn Clock,
    reference: Option<&ReferenceSolution>,
) -> Result<PlainRun> {
    let comps = RidgeComponents::new(problem);
    let w0 = vec![0.0; problem.d()];
    let cfg = schedule.resolve(&comps, &w0)?;
    let sub = |w: &[f64]| {
        reference
            .map(|r| r.suboptimality(problem, w).unwrap_or(f64::NAN))
            .unwrap_or(f64::NAN)
    };
    let mut runner = SvrgRunner::new(cfg).clock(clock);
    if reference.is_some() {
        runner = runner.suboptimality(&sub);
    }
    let (w, trace) = runner.run(&comps, &w0)?;
    let betas = comps.betas();
    Ok(PlainRun {
        w,
        trace,
        beta_hat: betas.iter().sum::<f64>() / betas.len() as f64,
        config: cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, max_abs_diff, DataMatrix, DenseMatrix};
    use crate::solver::reference_minimum;
    use crate::svrg::NoClock;

    fn decaying_problem() -> RidgeProblem {
        let (d, n) = (20, 80);
        let mut x = gaussian_matrix(d, n, 11).unwrap();
        for i in 0..d {
            let s = 1.0 / (1.0 + i as f64);
            for j in 0..n {
                x.set(i, j, x.get(i, j) * s);
            }
        }
        let y: Vec<f64> = (0..n).map(|j| x.get(0, j) + 0.5 * x.get(3, j)).collect();
        RidgeProblem::new(DataMatrix::dense(x), y, 1e-3).unwrap()
    }

    #[test]
    fn sketched_run_converges() {
        let p = decaying_problem();
        let r = reference_minimum(&p).unwrap();
        let comps_beta = {
            let sv = block_lanczos(&p.normalized_data(), &LanczosConfig::new(5, 0.5, 1)).unwrap();
            let pc = Preconditioner::sketched(&sv, p.lambda()).unwrap();
            let c = PreconditionedComponents::new(&p, &pc, ApplicationMode::Dense).unwrap();
            c.betas().iter().sum::<f64>() / c.betas().len() as f64
        };
        let schedule = Schedule::Fixed(SvrgConfig::tuned(30, 200, 0.5 / comps_beta, 3));
        let run = sketched_preconditioned_svrg(
            &p,
            &SketchOptions::new(5, 1),
            &schedule,
            &NoClock,
            Some(&r),
        )
        .unwrap();
        let last = run.trace.last().unwrap().suboptimality.unwrap();
        assert!(
            last < 1e-10 * run.trace.initial_suboptimality.unwrap(),
            "{last}"
        );
        assert!(max_abs_diff(&run.w, &r.w) < 1e-4);
        assert_eq!(run.diagnostics.singular_values.len(), 5);
    }

    #[test]
    fn theoretical_schedule_is_derived_from_components() {
        let p = decaying_problem();
        let run = plain_svrg(
            &p,
            &Schedule::Theoretical {
                epsilon: 1e-6,
                seed: 2,
            },
            &NoClock,
            None,
        )
        .unwrap();
        assert!(run.config.epochs >= 1);
        assert!((run.config.step_size - 0.1 / run.beta_hat).abs() < 1e-15);
        assert!(run.trace.records.iter().all(|r| r.suboptimality.is_none()));
    }

    #[test]
    fn zero_labels_stay_at_zero() {
        let x = DenseMatrix::identity(3);
        let p = RidgeProblem::new(DataMatrix::dense(x), vec![0.0; 3], 0.5).unwrap();
        let run = sketched_preconditioned_svrg(
            &p,
            &SketchOptions::new(2, 0),
            &Schedule::Theoretical {
                epsilon: 1e-8,
                seed: 0,
            },
            &NoClock,
            None,
        )
        .unwrap();
        assert!(run.w.iter().all(|&v| v == 0.0));
    }
}
