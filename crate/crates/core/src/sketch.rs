//! Randomized Block Lanczos low-rank approximation with per-vector
//! guarantees, plus an exact truncated SVD used as its oracle.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{bail, Error, Result};
use crate::linalg::{
    extend_basis, gaussian_matrix, gram_svd, norm2, scale, small_svd, DataMatrix, DenseMatrix,
};

/// Parameters of a Block Lanczos run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Target rank.
    pub k: usize,
    /// Accuracy parameter in `(0, 1)`.
    pub eps_prime: f64,
    pub seed: u64,
    /// Number of Krylov blocks; derived from `n` and `eps_prime` when absent.
    pub q_override: Option<usize>,
}

impl LanczosConfig {
    pub fn new(k: usize, eps_prime: f64, seed: u64) -> Self {
        Self {
            k,
            eps_prime,
            seed,
            q_override: None,
        }
    }

    pub fn with_blocks(mut self, q: usize) -> Self {
        self.q_override = Some(q);
        self
    }

    /// `max(2, ⌈ln(n) / √ε′⌉)` unless overridden.
    pub fn block_count(&self, n: usize) -> usize {
        self.q_override.unwrap_or_else(|| {
            let q = libm::ceil(libm::log(n.max(1) as f64) / libm::sqrt(self.eps_prime));
            (q as usize).max(2)
        })
    }

    fn validate(&self, d: usize, n: usize) -> Result<()> {
        if self.k == 0 || self.k > d.min(n) {
            bail!(
                InvalidParameter,
                "rank k={} must lie in [1, min({}, {})]",
                self.k,
                d,
                n
            );
        }
        if !(self.eps_prime > 0.0 && self.eps_prime < 1.0) {
            bail!(
                InvalidParameter,
                "eps' must lie in (0, 1), got {}",
                self.eps_prime
            );
        }
        if self.q_override == Some(0) {
            bail!(InvalidParameter, "block count must be at least 1");
        }
        Ok(())
    }
}

/// Rank-`k` factors `Ũ diag(σ̃) Ṽᵀ` of a `d x n` matrix.
#[derive(Debug, Clone)]
pub struct SketchedSvd {
    /// `d x k`, orthonormal columns.
    pub left: DenseMatrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `n x k`, orthonormal columns.
    pub right: DenseMatrix,
    /// Krylov blocks used; 0 for the exact oracle.
    pub q: usize,
    /// Rank that was asked for; exceeds [`Self::k`] when the Krylov basis
    /// came out rank-deficient.
    pub requested_k: usize,
}

impl SketchedSvd {
    /// Number of triplets actually returned.
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_reduced(&self) -> bool {
        self.k() < self.requested_k
    }

    pub fn dim(&self) -> usize {
        self.left.rows()
    }

    /// Dense `Ũ diag(σ̃) Ṽᵀ`; test scale only.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.left.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            scale(s, us.col_mut(j));
        }
        us.matmul(&self.right.transpose())
            .expect("conforming factors")
    }
}

/// Orthonormal basis of `span[AΠ, (AAᵀ)AΠ, …, (AAᵀ)^{q-1}AΠ]`.
///
/// Each new block is orthogonalized (twice) against every basis vector found
/// so far; columns that become numerically dependent are dropped, and the
/// iteration stops early once a block adds nothing or the basis fills `ℝ^d`.
pub fn krylov_block(a: &DataMatrix, pi: &DenseMatrix, q: usize) -> Result<DenseMatrix> {
    if pi.rows() != a.cols() {
        bail!(
            InvalidDimension,
            "starting block has {} rows, data has {} columns",
            pi.rows(),
            a.cols()
        );
    }
    if q == 0 {
        bail!(InvalidParameter, "block count must be at least 1");
    }
    let d = a.rows();
    let mut basis = DenseMatrix::zeros(d, 0);
    let mut block = a.matmul(pi)?;
    for step in 0..q {
        let start = basis.cols();
        let added = extend_basis(&mut basis, &block);
        if added == 0 || basis.cols() == d || step + 1 == q {
            break;
        }
        let fresh = DenseMatrix::new(d, added, basis.as_slice()[start * d..].to_vec())?;
        block = a.matmul(&a.t_matmul(&fresh)?)?;
    }
    if basis.cols() == 0 {
        return Err(Error::EmptyBasis);
    }
    Ok(basis)
}

/// Randomized Block Lanczos: returns `Ũ, σ̃, Ṽ` with
/// `Ũ diag(σ̃) Ṽᵀ = Q (QᵀA)_k` for the Krylov basis `Q`.
///
/// The top-`k` part of `QᵀA` comes from the eigendecomposition of the small
/// Gram matrix `(QᵀA)(QᵀA)ᵀ`; the right factors are `AᵀQ W̃` renormalized.
pub fn block_lanczos(a: &DataMatrix, cfg: &LanczosConfig) -> Result<SketchedSvd> {
    let (d, n) = (a.rows(), a.cols());
    cfg.validate(d, n)?;
    let q = cfg.block_count(n);
    let pi = gaussian_matrix(n, cfg.k, cfg.seed)?;
    let basis = krylov_block(a, &pi, q)?;
    let projected = a.t_matmul(&basis)?.transpose();
    let rank = cfg.k.min(basis.cols());
    let f = gram_svd(&projected, rank)?;
    let mut left = basis.matmul(&f.u)?;
    let mut right = f.v;
    for j in 0..rank {
        if crate::linalg::leading_entry_negative(left.col(j)) {
            scale(-1.0, left.col_mut(j));
            scale(-1.0, right.col_mut(j));
        }
    }
    Ok(SketchedSvd {
        left,
        singular_values: f.sigma,
        right,
        q,
        requested_k: cfg.k,
    })
}

/// True top-`k` SVD of the densified matrix; test scale only.
pub fn exact_truncated_svd(a: &DataMatrix, k: usize) -> Result<SketchedSvd> {
    let f = small_svd(&a.to_dense(), k)?;
    Ok(SketchedSvd {
        left: f.u,
        singular_values: f.sigma,
        right: f.v,
        q: 0,
        requested_k: k,
    })
}

/// Spectral norm of `A - ŨŨᵀA` by power iteration on its Gram operator.
pub fn residual_spectral_norm(
    a: &DataMatrix,
    basis: &DenseMatrix,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    if basis.rows() != a.rows() {
        bail!(
            InvalidDimension,
            "basis has {} rows, data has {}",
            basis.rows(),
            a.rows()
        );
    }
    let project_out = |v: &mut Vec<f64>| -> Result<()> {
        let c = basis.t_matvec(v)?;
        let p = basis.matvec(&c)?;
        v.iter_mut().zip(&p).for_each(|(x, y)| *x -= y);
        Ok(())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..a.cols()).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let nx = norm2(&x);
        if nx == 0.0 {
            return Ok(0.0);
        }
        scale(1.0 / nx, &mut x);
        // y = (I - ŨŨᵀ) A x ; x ← Aᵀ (I - ŨŨᵀ) y
        let mut y = a.matvec(&x)?;
        project_out(&mut y)?;
        estimate = norm2(&y);
        project_out(&mut y)?;
        x = a.t_matvec(&y)?;
    }
    Ok(estimate)
}

/// Result of checking a sketch against exact singular values `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerVectorCheck {
    /// `max_i |σ̃_i² − σ_i²| / σ_{k+1}²` (infinite if `σ_{k+1} = 0` and the
    /// error is nonzero).
    pub worst_ratio: f64,
    /// Whether every `|σ̃_i² − σ_i²| ≤ ε′ σ_{k+1}²`.
    pub holds: bool,
}

/// Checks the per-vector bound `|σ̃_i² − σ_i²| ≤ ε′ σ_{k+1}²` for `i ≤ k`,
/// with an absolute slack `abs_tol` for the exactly-low-rank case.
pub fn per_vector_check(
    sketch: &SketchedSvd,
    exact_sigma: &[f64],
    eps_prime: f64,
    abs_tol: f64,
) -> PerVectorCheck {
    let k = sketch.k();
    let tail = exact_sigma.get(k).copied().unwrap_or(0.0);
    let bound = eps_prime * tail * tail;
    let mut worst: f64 = 0.0;
    let mut holds = true;
    for (i, s) in sketch.singular_values.iter().enumerate() {
        let err = (s * s - exact_sigma[i] * exact_sigma[i]).abs();
        if err > bound + abs_tol {
            holds = false;
        }
        let ratio = if tail > 0.0 {
            err / (tail * tail)
        } else if err > abs_tol {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(ratio);
    }
    PerVectorCheck {
        worst_ratio: worst,
        holds,
    }
}
