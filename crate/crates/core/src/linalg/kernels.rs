use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dense::DenseMatrix;
use super::ops::{axpy, dot, norm2, scale};
use crate::error::{bail, Error, Result};

/// Relative tolerance below which a projected column counts as linearly
/// dependent on the basis built so far.
pub const RANK_DROP_TOL: f64 = 1e-12;

/// `rows x cols` matrix of i.i.d. standard normal entries, reproducible per seed.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        bail!(
            InvalidDimension,
            "gaussian matrix must be non-empty, got {}x{}",
            rows,
            cols
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Ok(DenseMatrix::from_raw(rows, cols, data))
}

/// Orthonormal basis of the column space of `m`.
///
/// Columns whose norm after projection falls below `1e-12` times the largest
/// input column norm are dropped, so the result can have fewer columns.
pub fn orthonormalize(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.cols() == 0 {
        bail!(InvalidDimension, "orthonormalize needs at least one column");
    }
    let mut basis = DenseMatrix::zeros(m.rows(), 0);
    extend_basis(&mut basis, m);
    if basis.cols() == 0 {
        return Err(Error::EmptyBasis);
    }
    Ok(basis)
}

/// Appends the part of `block`'s column space not already spanned by `basis`
/// (whose columns must be orthonormal). Every column is projected out twice
/// against all current basis vectors. Returns the number of columns added.
pub(crate) fn extend_basis(basis: &mut DenseMatrix, block: &DenseMatrix) -> usize {
    debug_assert_eq!(basis.rows(), block.rows());
    let reference = (0..block.cols())
        .map(|j| norm2(block.col(j)))
        .fold(0.0, f64::max);
    if reference == 0.0 {
        return 0;
    }
    let threshold = RANK_DROP_TOL * reference;
    let mut added = 0;
    let mut v = Vec::with_capacity(block.rows());
    for j in 0..block.cols() {
        v.clear();
        v.extend_from_slice(block.col(j));
        for _ in 0..2 {
            for l in 0..basis.cols() {
                let q = basis.col(l);
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm2(&v);
        if nv < threshold || basis.cols() == basis.rows() {
            continue;
        }
        scale(1.0 / nv, &mut v);
        basis.push_col(&v);
        added += 1;
    }
    added
}

/// A unit vector orthogonal to every column of `basis`, taken from the
/// standard basis by Gram-Schmidt. `None` when `basis` is already square.
pub(crate) fn orthogonal_complement_vector(basis: &DenseMatrix) -> Option<Vec<f64>> {
    let n = basis.rows();
    let mut best: Option<Vec<f64>> = None;
    let mut best_norm = 0.0;
    for e in 0..n {
        let mut v = alloc::vec![0.0; n];
        v[e] = 1.0;
        for _ in 0..2 {
            for l in 0..basis.cols() {
                let q = basis.col(l);
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm2(&v);
        if nv > best_norm {
            best_norm = nv;
            scale(1.0 / nv, &mut v);
            best = Some(v);
            if best_norm > 0.5 {
                break;
            }
        }
    }
    best.filter(|_| best_norm > 1e-8)
}
