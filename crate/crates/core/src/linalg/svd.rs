//! Dense truncated SVD for the small matrices produced by the sketch.

use alloc::vec::Vec;

use super::dense::DenseMatrix;
use super::eigen::sym_eigs;
use super::kernels::orthogonal_complement_vector;
use super::ops::{axpy, dot, norm2, scale};
use crate::error::{bail, Result};

/// Below this `min(rows, cols)` the SVD goes through the Gram matrix of the
/// smaller side; above it, one-sided Jacobi.
pub const GRAM_ROUTE_MAX_DIM: usize = 64;

/// Rank-`k` singular factors `M ≈ U diag(sigma) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `rows x k`, orthonormal columns.
    pub u: DenseMatrix,
    /// Non-increasing, non-negative.
    pub sigma: Vec<f64>,
    /// `cols x k`, orthonormal columns.
    pub v: DenseMatrix,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U diag(sigma) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            scale(s, us.col_mut(j));
        }
        us.matmul(&self.v.transpose()).expect("conforming factors")
    }
}

/// Top-`k` singular triplets of `m`.
///
/// Sign convention: the largest-magnitude entry of every left singular vector
/// is positive (lowest index wins ties); the right vector flips with it.
pub fn small_svd(m: &DenseMatrix, k: usize) -> Result<SvdFactors> {
    if k == 0 {
        bail!(InvalidParameter, "rank k must be at least 1");
    }
    let (rows, cols) = m.shape();
    if k > rows.min(cols) {
        bail!(
            InvalidParameter,
            "rank {} exceeds min({}, {})",
            k,
            rows,
            cols
        );
    }
    if rows.min(cols) <= GRAM_ROUTE_MAX_DIM {
        gram_svd(m, k)
    } else {
        jacobi_svd(m, k)
    }
}

/// SVD through the eigendecomposition of the Gram matrix of the smaller side.
/// The partner vectors are recovered by one multiplication with `m` and
/// renormalized; their norms give the singular values.
pub(crate) fn gram_svd(m: &DenseMatrix, k: usize) -> Result<SvdFactors> {
    if m.rows() <= m.cols() {
        let eig = sym_eigs(&m.gram_outer())?;
        let u = eig.vectors.truncate_cols(k);
        let (sigma, v) = partner_vectors(m, &u, false)?;
        finish(u, sigma, v)
    } else {
        let eig = sym_eigs(&m.gram_inner())?;
        let v = eig.vectors.truncate_cols(k);
        let (sigma, u) = partner_vectors(m, &v, true)?;
        finish(u, sigma, v)
    }
}

/// For each column `b` of `basis` computes `Mᵀ b` (or `M b` when
/// `forward`), whose norm is the singular value. Degenerate directions are
/// completed with vectors orthogonal to the ones found so far.
fn partner_vectors(
    m: &DenseMatrix,
    basis: &DenseMatrix,
    forward: bool,
) -> Result<(Vec<f64>, DenseMatrix)> {
    let dim = if forward { m.rows() } else { m.cols() };
    let mut out = DenseMatrix::zeros(dim, 0);
    let mut sigma = Vec::with_capacity(basis.cols());
    let mut top = 0.0f64;
    for j in 0..basis.cols() {
        let mut w = if forward {
            m.matvec(basis.col(j))?
        } else {
            m.t_matvec(basis.col(j))?
        };
        let nu = norm2(&w);
        top = top.max(nu);
        sigma.push(nu);
        if nu > 1e-13 * top && nu > 0.0 {
            scale(1.0 / nu, &mut w);
            // Clean up rounding against the vectors already accepted.
            for l in 0..out.cols() {
                let c = dot(out.col(l), &w);
                axpy(-c, out.col(l), &mut w);
            }
            let nw = norm2(&w);
            if nw > 0.5 {
                scale(1.0 / nw, &mut w);
                out.push_col(&w);
                continue;
            }
        }
        match orthogonal_complement_vector(&out) {
            Some(c) => out.push_col(&c),
            None => bail!(InvalidInput, "cannot complete singular basis"),
        }
    }
    Ok((sigma, out))
}

/// One-sided (Hestenes) Jacobi SVD.
pub(crate) fn jacobi_svd(m: &DenseMatrix, k: usize) -> Result<SvdFactors> {
    if m.rows() < m.cols() {
        let t = jacobi_svd(&m.transpose(), k)?;
        return finish(t.v, t.sigma, t.u);
    }
    let n = m.cols();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(a.col(p), a.col(p));
                let beta = dot(a.col(q), a.col(q));
                let gamma = dot(a.col(p), a.col(q));
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_cols(&mut a, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| norm2(a.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    order.truncate(k);

    let top = norms[order[0]];
    let mut u = DenseMatrix::zeros(m.rows(), 0);
    let mut vk = DenseMatrix::zeros(n, 0);
    let mut sigma = Vec::with_capacity(k);
    for &j in &order {
        let s = norms[j];
        sigma.push(s);
        vk.push_col(v.col(j));
        if s > 1e-13 * top && s > 0.0 {
            let mut col = a.col(j).to_vec();
            scale(1.0 / s, &mut col);
            u.push_col(&col);
        } else {
            match orthogonal_complement_vector(&u) {
                Some(c) => u.push_col(&c),
                None => bail!(InvalidInput, "cannot complete singular basis"),
            }
        }
    }
    finish(u, sigma, vk)
}

fn rotate_cols(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    for i in 0..rows {
        let ap = m.get(i, p);
        let aq = m.get(i, q);
        m.set(i, p, c * ap - s * aq);
        m.set(i, q, s * ap + c * aq);
    }
}

/// Orders triplets by non-increasing singular value and applies the sign
/// convention.
fn finish(u: DenseMatrix, sigma: Vec<f64>, v: DenseMatrix) -> Result<SvdFactors> {
    let k = sigma.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let mut uo = DenseMatrix::zeros(u.rows(), 0);
    let mut vo = DenseMatrix::zeros(v.rows(), 0);
    let mut so = Vec::with_capacity(k);
    for &j in &order {
        let mut uc = u.col(j).to_vec();
        let mut vc = v.col(j).to_vec();
        if leading_entry_negative(&uc) {
            scale(-1.0, &mut uc);
            scale(-1.0, &mut vc);
        }
        uo.push_col(&uc);
        vo.push_col(&vc);
        so.push(sigma[j]);
    }
    Ok(SvdFactors {
        u: uo,
        sigma: so,
        v: vo,
    })
}

/// True when the largest-magnitude entry (lowest index on ties) is negative.
pub(crate) fn leading_entry_negative(x: &[f64]) -> bool {
    let mut best = 0usize;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    x.get(best).is_some_and(|&v| v < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_matrix;

    fn check_factors(m: &DenseMatrix, f: &SvdFactors, tol: f64) {
        let k = f.rank();
        let ide = DenseMatrix::identity(k);
        assert!(f.u.gram_inner().sub(&ide).unwrap().max_abs() < tol);
        assert!(f.v.gram_inner().sub(&ide).unwrap().max_abs() < tol);
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        for j in 0..k {
            assert!(!leading_entry_negative(f.u.col(j)));
        }
        let _ = m;
    }

    #[test]
    fn diagonal() {
        let m = DenseMatrix::from_diagonal(&[3.0, 2.0, 1.0]);
        let f = small_svd(&m, 3).unwrap();
        assert_eq!(f.sigma.len(), 3);
        for (s, e) in f.sigma.iter().zip([3.0, 2.0, 1.0]) {
            assert!((s - e).abs() < 1e-14);
        }
        check_factors(&m, &f, 1e-14);
    }

    #[test]
    fn rank_one() {
        let u = [2.0, 0.0, 0.0];
        let v = [0.0, 3.0, 4.0, 0.0];
        let mut m = DenseMatrix::zeros(3, 4);
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m.set(i, j, ui * vj);
            }
        }
        let f = small_svd(&m, 1).unwrap();
        assert!((f.sigma[0] - 10.0).abs() < 1e-13);
        assert!(f.u.get(0, 0) > 0.0);
    }

    #[test]
    fn rejects_bad_rank() {
        let m = DenseMatrix::identity(3);
        assert!(matches!(
            small_svd(&m, 0),
            Err(crate::Error::InvalidParameter(_))
        ));
        assert!(matches!(
            small_svd(&m, 4),
            Err(crate::Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn random_reconstruction_both_routes() {
        let m = gaussian_matrix(6, 5, 42).unwrap();
        let g = gram_svd(&m, 5).unwrap();
        let j = jacobi_svd(&m, 5).unwrap();
        for f in [&g, &j] {
            check_factors(&m, f, 1e-12);
            assert!(f.reconstruct().sub(&m).unwrap().frobenius_norm() < 1e-9);
        }
        for (a, b) in g.sigma.iter().zip(&j.sigma) {
            assert!((a - b).abs() < 1e-12);
        }
        // Same sign convention, so the factors coincide too.
        assert!(g.u.sub(&j.u).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn wide_and_tall_jacobi() {
        for (r, c) in [(70, 90), (90, 70)] {
            let m = gaussian_matrix(r, c, 5).unwrap();
            let f = small_svd(&m, 70).unwrap();
            check_factors(&m, &f, 1e-11);
            assert!(f.reconstruct().sub(&m).unwrap().frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn rank_deficient_gram_route_completes_basis() {
        // 4x6 of rank 2: asking for all 4 triplets forces completion.
        let a = gaussian_matrix(4, 2, 1).unwrap();
        let b = gaussian_matrix(2, 6, 2).unwrap();
        let m = a.matmul(&b).unwrap();
        let f = small_svd(&m, 4).unwrap();
        check_factors(&m, &f, 1e-10);
        assert!(f.sigma[2] < 1e-12 && f.sigma[3] < 1e-12);
        assert!(f.reconstruct().sub(&m).unwrap().frobenius_norm() < 1e-10);
    }
}
