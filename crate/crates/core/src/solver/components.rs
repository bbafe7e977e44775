use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::linalg::{axpy, dot, norm2, DenseMatrix};
use crate::precond::Preconditioner;
use crate::svrg::{finish_average, EpochInput, EpochOutput, FiniteSum};

use super::RidgeProblem;

/// Largest `n · d` for which the dense application mode materializes the
/// preconditioned data.
pub const DENSE_MODE_MAX_ENTRIES: usize = 200_000_000;

/// Relative floor applied to smoothness constants of components with zero
/// gradient (empty data points), so that every component stays samplable.
const BETA_FLOOR: f64 = 1e-12;

/// How the preconditioned components are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApplicationMode {
    /// Precompute every `x̃_i = P^{-1/2} x_i`.
    Dense,
    /// Keep the data untouched and carry the iterate as `a + Ũt`.
    Lazy,
    /// Dense when `n · d ≤ 2·10⁸`, lazy otherwise.
    #[default]
    Auto,
}

impl ApplicationMode {
    fn resolve(self, n: usize, d: usize) -> Result<ApplicationMode> {
        let entries = n.saturating_mul(d);
        match self {
            ApplicationMode::Auto if entries <= DENSE_MODE_MAX_ENTRIES => {
                Ok(ApplicationMode::Dense)
            }
            ApplicationMode::Auto => Ok(ApplicationMode::Lazy),
            ApplicationMode::Dense if entries > DENSE_MODE_MAX_ENTRIES => bail!(
                ScaleGuard,
                "dense mode needs n*d = {} entries, above the limit of {}",
                entries,
                DENSE_MODE_MAX_ENTRIES
            ),
            mode => Ok(mode),
        }
    }
}

fn floor_betas(betas: &mut [f64]) {
    let positive: Vec<f64> = betas.iter().copied().filter(|b| *b > 0.0).collect();
    let mean = if positive.is_empty() {
        1.0
    } else {
        positive.iter().sum::<f64>() / positive.len() as f64
    };
    let floor = BETA_FLOOR * mean;
    betas.iter_mut().for_each(|b| *b = b.max(floor));
}

/// The ridge objective split into `N = n + d` components: `n` data terms
/// `((n+d)/n) · ½(wᵀx_i − y_i)²` and `d` coordinate penalties
/// `λ(n+d) · ½ w_j²`, so that their average is the ridge objective.
pub struct RidgeComponents<'a> {
    problem: &'a RidgeProblem,
    betas: Vec<f64>,
    data_factor: f64,
    reg_factor: f64,
}

impl<'a> RidgeComponents<'a> {
    pub fn new(problem: &'a RidgeProblem) -> Self {
        let (n, d) = (problem.n(), problem.d());
        let total = (n + d) as f64;
        let data_factor = total / n as f64;
        let reg_factor = problem.lambda() * total;
        let mut betas: Vec<f64> = (0..n)
            .map(|i| data_factor * problem.data().col_norm_sq(i))
            .collect();
        betas.extend(core::iter::repeat_n(reg_factor, d));
        floor_betas(&mut betas);
        Self {
            problem,
            betas,
            data_factor,
            reg_factor,
        }
    }

    pub fn problem(&self) -> &RidgeProblem {
        self.problem
    }
}

impl FiniteSum for RidgeComponents<'_> {
    fn num_components(&self) -> usize {
        self.problem.n() + self.problem.d()
    }

    fn dim(&self) -> usize {
        self.problem.d()
    }

    fn betas(&self) -> &[f64] {
        &self.betas
    }

    fn strong_convexity(&self) -> f64 {
        self.problem.lambda()
    }

    fn objective(&self, w: &[f64]) -> f64 {
        self.problem.objective_unchecked(w)
    }

    fn component_gradient(&self, i: usize, w: &[f64]) -> Vec<f64> {
        let n = self.problem.n();
        let mut g = vec![0.0; self.dim()];
        if i < n {
            let data = self.problem.data();
            let r = data.col_dot(i, w) - self.problem.labels()[i];
            data.col_axpy(i, self.data_factor * r, &mut g);
        } else {
            g[i - n] = self.reg_factor * w[i - n];
        }
        g
    }

    fn full_gradient(&self, w: &[f64]) -> Vec<f64> {
        self.problem.gradient_unchecked(w)
    }

    fn run_epoch(&self, input: &EpochInput<'_>) -> EpochOutput {
        let data = self.problem.data();
        let n = self.problem.n();
        let eta = input.step_size;
        let snapshot_scores: Vec<f64> = (0..n).map(|i| data.col_dot(i, input.snapshot)).collect();
        let mut w = input.snapshot.to_vec();
        let mut sum = vec![0.0; w.len()];
        for &i in input.indices {
            if i < n {
                let diff = self.data_factor
                    * (data.col_dot(i, &w) - snapshot_scores[i])
                    * input.weights[i];
                axpy(-eta, input.full_gradient, &mut w);
                if diff != 0.0 {
                    data.col_axpy(i, -eta * diff, &mut w);
                }
            } else {
                let j = i - n;
                let diff = self.reg_factor * (w[j] - input.snapshot[j]) * input.weights[i];
                axpy(-eta, input.full_gradient, &mut w);
                w[j] -= eta * diff;
            }
            axpy(1.0, &w, &mut sum);
        }
        finish_average(sum, input.indices.len())
    }
}

/// The ridge objective in the coordinates `w̃ = P^{1/2} w`:
/// `L̃(w̃) = L(P^{-1/2} w̃)`, split into data terms
/// `((n+d)/n) · ½(w̃ᵀx̃_i − y_i)²` with `x̃_i = P^{-1/2} x_i` and penalties
/// `λ(n+d) · ½(w̃ᵀb_j)²` with `b_j = P^{-1/2} e_j`.
///
/// `P^{-1/2} = c I + Ũ (diag(D) − c I) Ũᵀ`, so `b_j = c e_j + Ũ((D − c) ∘ r_j)`
/// where `r_j` is row `j` of `Ũ`.
pub struct PreconditionedComponents<'a> {
    problem: &'a RidgeProblem,
    precond: &'a Preconditioner,
    mode: ApplicationMode,
    betas: Vec<f64>,
    alpha: f64,
    data_factor: f64,
    reg_factor: f64,
    /// `D − c` per basis direction.
    shifted: Vec<f64>,
    /// Rows of `Ũ`, each of length `k`, stored contiguously.
    basis_rows: Vec<f64>,
    /// `s_i = Ũᵀx_i`, each of length `k`, stored contiguously.
    projections: Vec<f64>,
    /// Dense mode only: the columns `x̃_i`.
    transformed: Option<DenseMatrix>,
}

impl<'a> PreconditionedComponents<'a> {
    pub fn new(
        problem: &'a RidgeProblem,
        precond: &'a Preconditioner,
        mode: ApplicationMode,
    ) -> Result<Self> {
        let (n, d) = (problem.n(), problem.d());
        if precond.dim() != d {
            bail!(
                InvalidDimension,
                "preconditioner on R^{} for a problem in R^{}",
                precond.dim(),
                d
            );
        }
        if (precond.lambda() - problem.lambda()).abs() > 1e-12 * problem.lambda() {
            bail!(
                InvalidParameter,
                "preconditioner built for lambda {} but the problem uses {}",
                precond.lambda(),
                problem.lambda()
            );
        }
        let mode = mode.resolve(n, d)?;
        let basis = precond.basis();
        let k = precond.rank();
        let c = precond.tail_coeff();
        let shifted: Vec<f64> = precond.inv_sqrt_diag().iter().map(|x| x - c).collect();
        let basis_rows = basis.transpose().into_vec();

        let data = problem.data();
        let mut projections = Vec::with_capacity(n * k);
        for i in 0..n {
            projections.extend(data.project_col(i, basis));
        }

        let total = (n + d) as f64;
        let data_factor = total / n as f64;
        let reg_factor = problem.lambda() * total;
        let mut betas = Vec::with_capacity(n + d);
        for i in 0..n {
            let s = &projections[i * k..(i + 1) * k];
            betas.push(data_factor * precond.inv_sqrt_norm_sq(data.col_norm_sq(i), s));
        }
        for j in 0..d {
            let r = &basis_rows[j * k..(j + 1) * k];
            betas.push(reg_factor * precond.inv_sqrt_norm_sq(1.0, r));
        }
        floor_betas(&mut betas);

        let transformed = if mode == ApplicationMode::Dense {
            let mut m = DenseMatrix::zeros(d, n);
            let mut coeffs = vec![0.0; k];
            for i in 0..n {
                let s = &projections[i * k..(i + 1) * k];
                for ((c, sh), sl) in coeffs.iter_mut().zip(&shifted).zip(s) {
                    *c = sh * sl;
                }
                let col = m.col_mut(i);
                data.col_axpy(i, c, col);
                for (l, &cl) in coeffs.iter().enumerate() {
                    if cl != 0.0 {
                        axpy(cl, basis.col(l), col);
                    }
                }
            }
            Some(m)
        } else {
            None
        };

        Ok(Self {
            problem,
            precond,
            mode,
            betas,
            alpha: problem.lambda() * precond.min_inv_eigenvalue(),
            data_factor,
            reg_factor,
            shifted,
            basis_rows,
            projections,
            transformed,
        })
    }

    /// Overrides the strong-convexity constant reported to the SVRG engine.
    pub fn with_strong_convexity(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// The resolved mode (never [`ApplicationMode::Auto`]).
    pub fn mode(&self) -> ApplicationMode {
        self.mode
    }

    pub fn problem(&self) -> &RidgeProblem {
        self.problem
    }

    pub fn preconditioner(&self) -> &Preconditioner {
        self.precond
    }

    /// Maps a point back to the original coordinates, `ŵ = P^{-1/2} w̃`.
    pub fn to_original(&self, w: &[f64]) -> Vec<f64> {
        self.precond.apply_inv_sqrt(w).expect("matching length")
    }

    /// `x̃_i` as a dense vector.
    pub fn transformed_point(&self, i: usize) -> Vec<f64> {
        if let Some(m) = &self.transformed {
            return m.col(i).to_vec();
        }
        let mut out = vec![0.0; self.dim()];
        self.problem
            .data()
            .col_axpy(i, self.precond.tail_coeff(), &mut out);
        let s = self.projection(i);
        for (l, (&sh, &sl)) in self.shifted.iter().zip(s).enumerate() {
            if sh * sl != 0.0 {
                axpy(sh * sl, self.precond.basis().col(l), &mut out);
            }
        }
        out
    }

    /// `b_j = P^{-1/2} e_j` as a dense vector.
    pub fn penalty_direction(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.penalty_direction_into(j, &mut out);
        out
    }

    fn penalty_direction_into(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        out[j] = self.precond.tail_coeff();
        let r = self.basis_row(j);
        for (l, (&sh, &rl)) in self.shifted.iter().zip(r).enumerate() {
            if sh * rl != 0.0 {
                axpy(sh * rl, self.precond.basis().col(l), out);
            }
        }
    }

    fn k(&self) -> usize {
        self.shifted.len()
    }

    fn projection(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.projections[i * k..(i + 1) * k]
    }

    fn basis_row(&self, j: usize) -> &[f64] {
        let k = self.k();
        &self.basis_rows[j * k..(j + 1) * k]
    }

    /// `Ũᵀv`.
    fn project(&self, v: &[f64]) -> Vec<f64> {
        let basis = self.precond.basis();
        (0..self.k()).map(|l| dot(basis.col(l), v)).collect()
    }

    /// `Σ_l (D_l − c) · z_l · v_l`.
    fn shifted_dot(&self, z: &[f64], v: &[f64]) -> f64 {
        self.shifted
            .iter()
            .zip(z)
            .zip(v)
            .map(|((s, a), b)| s * a * b)
            .sum()
    }

    /// Per-component scores at the snapshot: `x̃_iᵀw̄` for data terms and
    /// `b_jᵀw̄` for penalties, both read off `P^{-1/2} w̄`.
    fn snapshot_scores(&self, snapshot: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mapped = self.to_original(snapshot);
        let data = self.problem.data();
        let scores = (0..self.problem.n())
            .map(|i| data.col_dot(i, &mapped))
            .collect();
        (scores, mapped)
    }

    fn run_dense_epoch(&self, input: &EpochInput<'_>, xt: &DenseMatrix) -> EpochOutput {
        let n = self.problem.n();
        let eta = input.step_size;
        let (scores, penalties) = self.snapshot_scores(input.snapshot);
        let mut w = input.snapshot.to_vec();
        let mut sum = vec![0.0; w.len()];
        let mut b = vec![0.0; w.len()];
        for &i in input.indices {
            if i < n {
                let col = xt.col(i);
                let diff = self.data_factor * (dot(col, &w) - scores[i]) * input.weights[i];
                axpy(-eta, input.full_gradient, &mut w);
                if diff != 0.0 {
                    axpy(-eta * diff, col, &mut w);
                }
            } else {
                let j = i - n;
                self.penalty_direction_into(j, &mut b);
                let diff = self.reg_factor * (dot(&b, &w) - penalties[j]) * input.weights[i];
                axpy(-eta, input.full_gradient, &mut w);
                if diff != 0.0 {
                    axpy(-eta * diff, &b, &mut w);
                }
            }
            axpy(1.0, &w, &mut sum);
        }
        finish_average(sum, input.indices.len())
    }

    /// The iterate is `w = a + Ũt` and `z = Ũᵀw` is kept up to date, so a data
    /// step costs `O(nnz(x_i) + k)` plus the dense `O(d)` full-gradient shift.
    fn run_lazy_epoch(&self, input: &EpochInput<'_>) -> EpochOutput {
        let n = self.problem.n();
        let k = self.k();
        let data = self.problem.data();
        let c = self.precond.tail_coeff();
        let diag = self.precond.inv_sqrt_diag();
        let eta = input.step_size;
        let (scores, penalties) = self.snapshot_scores(input.snapshot);
        let full_proj = self.project(input.full_gradient);

        let mut a = input.snapshot.to_vec();
        let mut t = vec![0.0; k];
        let mut z = self.project(input.snapshot);
        let mut sum_a = vec![0.0; a.len()];
        let mut sum_t = vec![0.0; k];
        for &i in input.indices {
            if i < n {
                let s = self.projection(i);
                let raw = data.col_dot(i, &a) + dot(&t, s);
                let score = c * raw + self.shifted_dot(&z, s);
                let diff = self.data_factor * (score - scores[i]) * input.weights[i];
                if diff != 0.0 {
                    let g = eta * diff;
                    data.col_axpy(i, -g * c, &mut a);
                    for l in 0..k {
                        t[l] -= g * self.shifted[l] * s[l];
                        z[l] -= g * diag[l] * s[l];
                    }
                }
            } else {
                let j = i - n;
                let r = self.basis_row(j);
                let wj = a[j] + dot(&t, r);
                let score = c * wj + self.shifted_dot(&z, r);
                let diff = self.reg_factor * (score - penalties[j]) * input.weights[i];
                if diff != 0.0 {
                    let g = eta * diff;
                    a[j] -= g * c;
                    for l in 0..k {
                        t[l] -= g * self.shifted[l] * r[l];
                        z[l] -= g * diag[l] * r[l];
                    }
                }
            }
            axpy(-eta, input.full_gradient, &mut a);
            axpy(-eta, &full_proj, &mut z);
            axpy(1.0, &a, &mut sum_a);
            axpy(1.0, &t, &mut sum_t);
        }

        let basis = self.precond.basis();
        let materialize = |a: &mut Vec<f64>, t: &[f64]| {
            for (l, &tl) in t.iter().enumerate() {
                if tl != 0.0 {
                    axpy(tl, basis.col(l), a);
                }
            }
        };
        materialize(&mut a, &t);
        let recomputed = self.project(&a);
        let deviation: Vec<f64> = z.iter().zip(&recomputed).map(|(x, y)| x - y).collect();
        let drift = norm2(&deviation) / norm2(&a).max(f64::MIN_POSITIVE);

        materialize(&mut sum_a, &sum_t);
        let mut out = finish_average(sum_a, input.indices.len());
        out.projection_drift = Some(drift);
        out
    }
}

impl FiniteSum for PreconditionedComponents<'_> {
    fn num_components(&self) -> usize {
        self.problem.n() + self.problem.d()
    }

    fn dim(&self) -> usize {
        self.problem.d()
    }

    fn betas(&self) -> &[f64] {
        &self.betas
    }

    fn strong_convexity(&self) -> f64 {
        self.alpha
    }

    fn objective(&self, w: &[f64]) -> f64 {
        self.problem.objective_unchecked(&self.to_original(w))
    }

    fn component_gradient(&self, i: usize, w: &[f64]) -> Vec<f64> {
        let n = self.problem.n();
        if i < n {
            let mut x = self.transformed_point(i);
            let r = dot(&x, w) - self.problem.labels()[i];
            let f = self.data_factor * r;
            x.iter_mut().for_each(|v| *v *= f);
            x
        } else {
            let mut b = self.penalty_direction(i - n);
            let f = self.reg_factor * dot(&b, w);
            b.iter_mut().for_each(|v| *v *= f);
            b
        }
    }

    /// `P^{-1/2} ∇L(P^{-1/2} w)`.
    fn full_gradient(&self, w: &[f64]) -> Vec<f64> {
        let g = self.problem.gradient_unchecked(&self.to_original(w));
        self.to_original(&g)
    }

    fn run_epoch(&self, input: &EpochInput<'_>) -> EpochOutput {
        match &self.transformed {
            Some(xt) => self.run_dense_epoch(input, xt),
            None => self.run_lazy_epoch(input),
        }
    }
}
