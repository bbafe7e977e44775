//! Ridge regression: the objective, its finite-sum decompositions (plain and
//! preconditioned), a reference solver, and the sketched preconditioned SVRG
//! pipeline.

mod components;
mod pipeline;

use alloc::vec;
use alloc::vec::Vec;

pub use components::{
    ApplicationMode, PreconditionedComponents, RidgeComponents, DENSE_MODE_MAX_ENTRIES,
};
pub use pipeline::{
    plain_svrg, preconditioned_svrg, sketched_preconditioned_svrg, sketched_preconditioner,
    PipelineDiagnostics, PlainRun, Schedule, SketchOptions, SketchedRun, SKETCH_EPS_PRIME,
};

use crate::error::{bail, Result};
use crate::linalg::{axpy, dot, norm2, spd_solve, DataMatrix};

/// Dimension up to which [`reference_minimum`] uses a dense Cholesky solve.
pub const DIRECT_SOLVE_MAX_DIM: usize = 5000;

/// `min_w (1/n) Σ ½(wᵀx_i − y_i)² + (λ/2)‖w‖²` over the columns `x_i` of a
/// `d x n` data matrix.
#[derive(Debug, Clone)]
pub struct RidgeProblem {
    data: DataMatrix,
    labels: Vec<f64>,
    lambda: f64,
}

impl RidgeProblem {
    pub fn new(data: DataMatrix, labels: Vec<f64>, lambda: f64) -> Result<Self> {
        if labels.len() != data.cols() {
            bail!(
                InvalidDimension,
                "{} labels for {} data points",
                labels.len(),
                data.cols()
            );
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            bail!(InvalidParameter, "lambda must be positive, got {}", lambda);
        }
        if labels.iter().any(|y| !y.is_finite()) {
            bail!(InvalidInput, "non-finite label");
        }
        if data.cols() == 0 || data.rows() == 0 {
            bail!(InvalidDimension, "empty data matrix");
        }
        Ok(Self {
            data,
            labels,
            lambda,
        })
    }

    pub fn data(&self) -> &DataMatrix {
        &self.data
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of data points.
    pub fn n(&self) -> usize {
        self.data.cols()
    }

    /// Number of features.
    pub fn d(&self) -> usize {
        self.data.rows()
    }

    /// `X̄ = n^{-1/2} X`, sharing storage; `X̄X̄ᵀ` is the correlation matrix `C`.
    pub fn normalized_data(&self) -> DataMatrix {
        self.data
            .scaled(1.0 / libm::sqrt(self.n() as f64))
            .expect("positive scale")
    }

    fn check_point(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.d() {
            bail!(
                InvalidDimension,
                "point of length {} in R^{}",
                w.len(),
                self.d()
            );
        }
        Ok(())
    }

    /// Ridge objective at `w`.
    pub fn objective(&self, w: &[f64]) -> Result<f64> {
        self.check_point(w)?;
        Ok(self.objective_unchecked(w))
    }

    pub(crate) fn objective_unchecked(&self, w: &[f64]) -> f64 {
        let n = self.n() as f64;
        let loss: f64 = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let r = self.data.col_dot(i, w) - y;
                0.5 * r * r
            })
            .sum();
        loss / n + 0.5 * self.lambda * dot(w, w)
    }

    /// `∇L(w) = (C + λI) w − (1/n) Σ y_i x_i`.
    pub fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_point(w)?;
        Ok(self.gradient_unchecked(w))
    }

    pub(crate) fn gradient_unchecked(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n() as f64;
        let mut g: Vec<f64> = w.iter().map(|x| self.lambda * x).collect();
        for (i, y) in self.labels.iter().enumerate() {
            let r = self.data.col_dot(i, w) - y;
            if r != 0.0 {
                self.data.col_axpy(i, r / n, &mut g);
            }
        }
        g
    }

    /// `(C + λI) v`.
    pub fn hessian_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_point(v)?;
        let n = self.n() as f64;
        let mut out: Vec<f64> = v.iter().map(|x| self.lambda * x).collect();
        for i in 0..self.n() {
            let s = self.data.col_dot(i, v);
            if s != 0.0 {
                self.data.col_axpy(i, s / n, &mut out);
            }
        }
        Ok(out)
    }

    /// `(1/n) Σ y_i x_i`, the right-hand side of the normal equations.
    pub fn moment_vector(&self) -> Vec<f64> {
        let n = self.n() as f64;
        let mut b = vec![0.0; self.d()];
        for (i, y) in self.labels.iter().enumerate() {
            if *y != 0.0 {
                self.data.col_axpy(i, y / n, &mut b);
            }
        }
        b
    }
}

/// Exact minimizer of a ridge problem and its objective value.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub w: Vec<f64>,
    pub objective: f64,
}

impl ReferenceSolution {
    /// `L(w) − L* = ½ (w − w*)ᵀ (C + λI)(w − w*)`, evaluated without the
    /// cancellation of subtracting two nearly equal objective values.
    pub fn suboptimality(&self, problem: &RidgeProblem, w: &[f64]) -> Result<f64> {
        let diff: Vec<f64> = w.iter().zip(&self.w).map(|(a, b)| a - b).collect();
        let hd = problem.hessian_apply(&diff)?;
        Ok(0.5 * dot(&diff, &hd).max(0.0))
    }
}

/// Solves `(C + λI) w = (1/n) Σ y_i x_i`.
///
/// Dense Cholesky with iterative refinement for `d ≤ 5000`; otherwise
/// conjugate gradients run until the gradient norm is at most `1e-12`.
pub fn reference_minimum(problem: &RidgeProblem) -> Result<ReferenceSolution> {
    let b = problem.moment_vector();
    let w = if problem.d() <= DIRECT_SOLVE_MAX_DIM {
        let xbar = problem.normalized_data().to_dense();
        let mut a = xbar.gram_outer();
        for i in 0..problem.d() {
            a.set(i, i, a.get(i, i) + problem.lambda());
        }
        spd_solve(&a, &b, 1e-13)?
    } else {
        conjugate_gradient(problem, &b, 1e-12, 20 * problem.d() + 1000)?
    };
    let objective = problem.objective_unchecked(&w);
    Ok(ReferenceSolution { w, objective })
}

fn conjugate_gradient(
    problem: &RidgeProblem,
    b: &[f64],
    abs_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..max_iter {
        if libm::sqrt(rr) <= abs_tol {
            break;
        }
        let ap = problem.hessian_apply(&p)?;
        let alpha = rr / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    // Guard against drift of the recursive residual.
    let g = problem.gradient_unchecked(&x);
    if norm2(&g) > abs_tol.max(1e-10 * norm2(b)) {
        bail!(
            InvalidInput,
            "conjugate gradients did not reach the requested accuracy"
        );
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn single_point() -> RidgeProblem {
        let x = DenseMatrix::from_rows(&[&[1.0], &[0.0]]).unwrap();
        RidgeProblem::new(DataMatrix::dense(x), vec![1.0], 1.0).unwrap()
    }

    #[test]
    fn objective_at_zero() {
        let x = DenseMatrix::from_rows(&[&[1.0, 2.0, 0.5], &[0.0, -1.0, 3.0]]).unwrap();
        let p = RidgeProblem::new(DataMatrix::dense(x), vec![1.0, -2.0, 0.5], 0.3).unwrap();
        let expected = (1.0 + 4.0 + 0.25) / 6.0;
        assert!((p.objective(&[0.0, 0.0]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn objective_hand_value() {
        let p = single_point();
        assert!((p.objective(&[0.5, 0.0]).unwrap() - 0.25).abs() < 1e-15);
        // Moving orthogonally to x only changes the penalty.
        let moved = p.objective(&[0.5, 2.0]).unwrap();
        assert!((moved - (0.25 + 0.5 * 4.0)).abs() < 1e-15);
    }

    #[test]
    fn reference_hand_solution() {
        let p = single_point();
        let r = reference_minimum(&p).unwrap();
        assert!((r.w[0] - 0.5).abs() < 1e-15 && r.w[1].abs() < 1e-15);
        assert!((r.objective - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_labels_give_zero_solution() {
        let x = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 0.5]]).unwrap();
        let p = RidgeProblem::new(DataMatrix::dense(x), vec![0.0, 0.0], 0.1).unwrap();
        let r = reference_minimum(&p).unwrap();
        assert!(r.w.iter().all(|&v| v == 0.0));
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn rejects_invalid_problem() {
        let x = DataMatrix::dense(DenseMatrix::identity(2));
        assert!(RidgeProblem::new(x.clone(), vec![1.0], 1.0).is_err());
        assert!(RidgeProblem::new(x.clone(), vec![1.0, 2.0], 0.0).is_err());
        let p = RidgeProblem::new(x, vec![1.0, 2.0], 1.0).unwrap();
        assert!(p.objective(&[1.0]).is_err());
    }

    #[test]
    fn cg_matches_direct() {
        let x = crate::linalg::gaussian_matrix(15, 40, 3).unwrap();
        let y: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let p = RidgeProblem::new(DataMatrix::dense(x), y, 1e-3).unwrap();
        let direct = reference_minimum(&p).unwrap();
        let b = p.moment_vector();
        let cg = conjugate_gradient(&p, &b, 1e-13, 500).unwrap();
        let diff = crate::linalg::max_abs_diff(&direct.w, &cg);
        assert!(diff < 1e-9, "diff {diff}");
    }
}
