//! SVRG with smoothness-weighted component sampling.
//!
//! The engine owns the epoch structure (snapshot, full gradient, index
//! sampling, averaging, divergence checks and the trace). Problems describe
//! themselves through [`FiniteSum`] and may override
//! [`FiniteSum::run_epoch`] with a cheaper inner loop as long as it performs
//! the same updates.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{bail, Error, Result};
use crate::linalg::axpy;

/// Objective growth factor (relative to the starting objective) treated as
/// divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// `F(w) = (1/N) Σ_i f_i(w)` with `β_i`-smooth components and an
/// `α`-strongly convex average.
pub trait FiniteSum {
    fn num_components(&self) -> usize;

    fn dim(&self) -> usize;

    /// Smoothness constants `β_i`, all positive.
    fn betas(&self) -> &[f64];

    /// Strong convexity `α` of `F` (a lower bound is acceptable).
    fn strong_convexity(&self) -> f64;

    fn objective(&self, w: &[f64]) -> f64;

    fn component_gradient(&self, i: usize, w: &[f64]) -> Vec<f64>;

    fn full_gradient(&self, w: &[f64]) -> Vec<f64> {
        let n = self.num_components();
        let mut g = vec![0.0; self.dim()];
        for i in 0..n {
            axpy(1.0 / n as f64, &self.component_gradient(i, w), &mut g);
        }
        g
    }

    /// One inner loop: starting from `w_0 = snapshot`, for every sampled index
    /// `i_t` take `w_t = w_{t-1} − η v_t` with the variance-reduced direction
    /// `v_t = (∇f_i(w_{t-1}) − ∇f_i(snapshot)) · weights[i] + ∇F(snapshot)`.
    /// Returns the average of `w_1..w_m`.
    fn run_epoch(&self, input: &EpochInput<'_>) -> EpochOutput {
        let mut w = input.snapshot.to_vec();
        let mut sum = vec![0.0; w.len()];
        for &i in input.indices {
            let v = variance_reduced_direction(
                self,
                i,
                &w,
                input.snapshot,
                input.full_gradient,
                input.weights[i],
            );
            axpy(-input.step_size, &v, &mut w);
            axpy(1.0, &w, &mut sum);
        }
        finish_average(sum, input.indices.len())
    }
}

/// Everything an inner loop needs for one epoch.
#[derive(Debug, Clone, Copy)]
pub struct EpochInput<'a> {
    pub snapshot: &'a [f64],
    pub full_gradient: &'a [f64],
    /// Sampled component indices, one per inner step.
    pub indices: &'a [usize],
    /// `1 / (N q_i)` per component.
    pub weights: &'a [f64],
    pub step_size: f64,
}

#[derive(Debug, Clone)]
pub struct EpochOutput {
    /// `(1/m) Σ_t w_t`.
    pub average: Vec<f64>,
    /// Implementations that maintain auxiliary projections report the largest
    /// deviation from a from-scratch recomputation here.
    pub projection_drift: Option<f64>,
}

pub(crate) fn finish_average(mut sum: Vec<f64>, m: usize) -> EpochOutput {
    let inv = 1.0 / m.max(1) as f64;
    sum.iter_mut().for_each(|x| *x *= inv);
    EpochOutput {
        average: sum,
        projection_drift: None,
    }
}

/// `(∇f_i(w) − ∇f_i(snapshot)) · weight + full_gradient`.
pub fn variance_reduced_direction<F: FiniteSum + ?Sized>(
    problem: &F,
    i: usize,
    w: &[f64],
    snapshot: &[f64],
    full_gradient: &[f64],
    weight: f64,
) -> Vec<f64> {
    let g1 = problem.component_gradient(i, w);
    let g0 = problem.component_gradient(i, snapshot);
    g1.iter()
        .zip(&g0)
        .zip(full_gradient)
        .map(|((a, b), f)| (a - b) * weight + f)
        .collect()
}

/// Smallest index whose cumulative weight is `≥ u`.
///
/// The table must be non-decreasing and end at 1 (within `1e-12`).
pub fn sample_index(cumulative: &[f64], u: f64) -> Result<usize> {
    let Some(&last) = cumulative.last() else {
        bail!(InvalidInput, "empty cumulative table");
    };
    if (last - 1.0).abs() > 1e-12 {
        bail!(
            InvalidInput,
            "cumulative table ends at {} instead of 1",
            last
        );
    }
    if cumulative.first().is_some_and(|&c| c < 0.0) || cumulative.windows(2).any(|w| w[1] < w[0]) {
        bail!(InvalidInput, "cumulative table is not non-decreasing");
    }
    Ok(search(cumulative, u))
}

#[inline]
fn search(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .partition_point(|&c| c < u)
        .min(cumulative.len() - 1)
}

/// Index sampler with `q_i = β_i / Σ_j β_j`.
#[derive(Debug, Clone)]
pub struct WeightedSampler {
    cumulative: Vec<f64>,
    probabilities: Vec<f64>,
}

impl WeightedSampler {
    pub fn new(betas: &[f64]) -> Result<Self> {
        if betas.is_empty() {
            bail!(InvalidInput, "no components to sample from");
        }
        if betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            bail!(
                InvalidInput,
                "smoothness constants must be positive and finite"
            );
        }
        let n = betas.len();
        let total: f64 = betas.iter().sum();
        let uniform = betas.iter().all(|&b| b == betas[0]);
        let (cumulative, probabilities) = if uniform {
            (
                (1..=n).map(|i| i as f64 / n as f64).collect(),
                vec![1.0 / n as f64; n],
            )
        } else {
            let mut acc = 0.0;
            let mut cumulative: Vec<f64> = betas
                .iter()
                .map(|b| {
                    acc += b;
                    acc / total
                })
                .collect();
            cumulative[n - 1] = 1.0;
            (cumulative, betas.iter().map(|b| b / total).collect())
        };
        Ok(Self {
            cumulative,
            probabilities,
        })
    }

    /// Sampler with equal weights.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(&vec![1.0; n])
    }

    #[inline]
    pub fn sample(&self, u: f64) -> usize {
        search(&self.cumulative, u)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvrgMode {
    /// Parameters from the strong-convexity recipe.
    Theoretical,
    /// Epoch length and step size chosen by the caller (benchmarks).
    Tuned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrgConfig {
    pub epochs: usize,
    pub epoch_length: usize,
    pub step_size: f64,
    pub seed: u64,
    pub mode: SvrgMode,
}

impl SvrgConfig {
    pub fn tuned(epochs: usize, epoch_length: usize, step_size: f64, seed: u64) -> Self {
        Self {
            epochs,
            epoch_length,
            step_size,
            seed,
            mode: SvrgMode::Tuned,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.epoch_length == 0 {
            bail!(
                InvalidParameter,
                "epochs and epoch length must be at least 1"
            );
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            bail!(
                InvalidParameter,
                "step size must be positive, got {}",
                self.step_size
            );
        }
        Ok(())
    }
}

/// `S = max(1, ⌈ln(gap/ε)⌉)`, `m = ⌈β̂/α⌉`, `η = 0.1/β̂` with `β̂` the mean
/// smoothness constant.
pub fn theoretical_params<F: FiniteSum + ?Sized>(
    problem: &F,
    w0_gap: f64,
    epsilon: f64,
) -> Result<SvrgConfig> {
    if !(epsilon > 0.0) || !(w0_gap > 0.0) {
        bail!(InvalidParameter, "gap and epsilon must be positive");
    }
    let betas = problem.betas();
    if betas.is_empty() {
        bail!(InvalidInput, "no components");
    }
    let beta_hat = betas.iter().sum::<f64>() / betas.len() as f64;
    let alpha = problem.strong_convexity();
    if !(alpha > 0.0) {
        bail!(
            InvalidParameter,
            "strong convexity must be positive, got {}",
            alpha
        );
    }
    let epochs = (libm::ceil(libm::log(w0_gap / epsilon)).max(1.0)) as usize;
    let epoch_length = (libm::ceil(beta_hat / alpha).max(1.0)) as usize;
    Ok(SvrgConfig {
        epochs,
        epoch_length,
        step_size: 0.1 / beta_hat,
        seed: 0,
        mode: SvrgMode::Theoretical,
    })
}

/// Source of elapsed wall-clock time; the core crate has no clock of its own.
pub trait Clock {
    /// Milliseconds since an arbitrary fixed origin.
    fn now_ms(&self) -> f64;
}

/// Reports zero elapsed time.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    pub objective: f64,
    pub suboptimality: Option<f64>,
    /// Cumulative optimizer time, excluding objective evaluations.
    pub elapsed_ms: f64,
    pub projection_drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub initial_objective: f64,
    pub initial_suboptimality: Option<f64>,
    pub records: Vec<EpochRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

type SuboptimalityFn<'a> = &'a dyn Fn(&[f64]) -> f64;

/// Runs SVRG with optional timing and suboptimality reporting.
pub struct SvrgRunner<'a> {
    cfg: SvrgConfig,
    clock: &'a dyn Clock,
    suboptimality: Option<SuboptimalityFn<'a>>,
}

impl<'a> SvrgRunner<'a> {
    pub fn new(cfg: SvrgConfig) -> Self {
        Self {
            cfg,
            clock: &NoClock,
            suboptimality: None,
        }
    }

    pub fn clock(mut self, clock: &'a dyn Clock) -> Self {
        self.clock = clock;
        self
    }

    /// Evaluator of `F(w) − F*` in the problem's own coordinates.
    pub fn suboptimality(mut self, f: &'a dyn Fn(&[f64]) -> f64) -> Self {
        self.suboptimality = Some(f);
        self
    }

    pub fn run<F: FiniteSum + ?Sized>(
        &self,
        problem: &F,
        w0: &[f64],
    ) -> Result<(Vec<f64>, ConvergenceTrace)> {
        let cfg = &self.cfg;
        cfg.validate()?;
        if w0.len() != problem.dim() {
            bail!(
                InvalidDimension,
                "start point of length {} for a problem in R^{}",
                w0.len(),
                problem.dim()
            );
        }
        if w0.iter().any(|x| !x.is_finite()) {
            bail!(InvalidInput, "start point is not finite");
        }
        let n = problem.num_components();
        let sampler = WeightedSampler::new(problem.betas())?;
        let weights: Vec<f64> = sampler
            .probabilities()
            .iter()
            .map(|q| 1.0 / (n as f64 * q))
            .collect();

        let initial = problem.objective(w0);
        let mut trace = ConvergenceTrace {
            initial_objective: initial,
            initial_suboptimality: self.suboptimality.map(|f| f(w0)),
            records: Vec::with_capacity(cfg.epochs),
        };
        if !initial.is_finite() {
            return Err(Error::Divergence {
                epoch: 0,
                objective: initial,
                trace,
            });
        }
        let limit = DIVERGENCE_FACTOR * initial.abs().max(f64::MIN_POSITIVE);

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut snapshot = w0.to_vec();
        let mut indices = vec![0usize; cfg.epoch_length];
        let mut elapsed = 0.0;
        for epoch in 1..=cfg.epochs {
            let start = self.clock.now_ms();
            let full = problem.full_gradient(&snapshot);
            for slot in indices.iter_mut() {
                *slot = sampler.sample(rng.random::<f64>());
            }
            let out = problem.run_epoch(&EpochInput {
                snapshot: &snapshot,
                full_gradient: &full,
                indices: &indices,
                weights: &weights,
                step_size: cfg.step_size,
            });
            snapshot = out.average;
            elapsed += self.clock.now_ms() - start;

            let objective = problem.objective(&snapshot);
            trace.records.push(EpochRecord {
                epoch,
                objective,
                suboptimality: self.suboptimality.map(|f| f(&snapshot)),
                elapsed_ms: elapsed,
                projection_drift: out.projection_drift,
            });
            if !objective.is_finite() || objective > limit {
                return Err(Error::Divergence {
                    epoch,
                    objective,
                    trace,
                });
            }
        }
        Ok((snapshot, trace))
    }
}

/// Runs SVRG without timing or suboptimality reporting.
pub fn svrg_solve<F: FiniteSum + ?Sized>(
    problem: &F,
    cfg: &SvrgConfig,
    w0: &[f64],
) -> Result<(Vec<f64>, ConvergenceTrace)> {
    SvrgRunner::new(*cfg).run(problem, w0)
}
