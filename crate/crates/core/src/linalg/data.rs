use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::dense::DenseMatrix;
use super::ops::{axpy, dot};
use super::sparse::SparseMatrix;
use crate::error::{bail, Result};

/// Backing store of a [`DataMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

/// A `d x n` design matrix whose columns are data points, with a uniform
/// positive scale applied lazily: logical entry `(i, j)` is
/// `scale * stored(i, j)`.
///
/// Storage is shared, so [`DataMatrix::scaled`] (e.g. forming `n^{-1/2} X`)
/// never copies entries.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    storage: Arc<Storage>,
    scale: f64,
}

impl DataMatrix {
    pub fn dense(m: DenseMatrix) -> Self {
        Self {
            storage: Arc::new(Storage::Dense(m)),
            scale: 1.0,
        }
    }

    pub fn sparse(m: SparseMatrix) -> Self {
        Self {
            storage: Arc::new(Storage::Sparse(m)),
            scale: 1.0,
        }
    }

    pub fn with_scale(storage: Storage, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            bail!(
                InvalidParameter,
                "scale must be positive and finite, got {}",
                scale
            );
        }
        Ok(Self {
            storage: Arc::new(storage),
            scale,
        })
    }

    /// Same storage, scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let scale = self.scale * factor;
        if !(scale > 0.0 && scale.is_finite()) {
            bail!(
                InvalidParameter,
                "scale must stay positive and finite, got {}",
                scale
            );
        }
        Ok(Self {
            storage: Arc::clone(&self.storage),
            scale,
        })
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_sparse(&self) -> bool {
        matches!(*self.storage, Storage::Sparse(_))
    }

    /// Number of features `d`.
    pub fn rows(&self) -> usize {
        match &*self.storage {
            Storage::Dense(m) => m.rows(),
            Storage::Sparse(m) => m.rows(),
        }
    }

    /// Number of data points `n`.
    pub fn cols(&self) -> usize {
        match &*self.storage {
            Storage::Dense(m) => m.cols(),
            Storage::Sparse(m) => m.cols(),
        }
    }

    pub fn nnz(&self) -> usize {
        match &*self.storage {
            Storage::Dense(m) => m.rows() * m.cols(),
            Storage::Sparse(m) => m.nnz(),
        }
    }

    /// Logical entries as a dense matrix.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = match &*self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        };
        if self.scale != 1.0 {
            m.scale_in_place(self.scale);
        }
        m
    }

    /// `X v` for `v` of length `n`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = match &*self.storage {
            Storage::Dense(m) => m.matvec(v)?,
            Storage::Sparse(m) => m.matvec(v)?,
        };
        self.apply_scale(&mut out);
        Ok(out)
    }

    /// `Xᵀ v` for `v` of length `d`.
    pub fn t_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = match &*self.storage {
            Storage::Dense(m) => m.t_matvec(v)?,
            Storage::Sparse(m) => m.t_matvec(v)?,
        };
        self.apply_scale(&mut out);
        Ok(out)
    }

    /// `X B` for `B` of shape `n x k`.
    pub fn matmul(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.rows() != self.cols() {
            bail!(
                InvalidDimension,
                "data matmul: {}x{} times {}x{}",
                self.rows(),
                self.cols(),
                b.rows(),
                b.cols()
            );
        }
        let mut out = DenseMatrix::zeros(self.rows(), b.cols());
        for j in 0..b.cols() {
            let col = self.matvec(b.col(j))?;
            out.col_mut(j).copy_from_slice(&col);
        }
        Ok(out)
    }

    /// `Xᵀ B` for `B` of shape `d x k`.
    pub fn t_matmul(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.rows() != self.rows() {
            bail!(
                InvalidDimension,
                "data transposed matmul: ({}x{})ᵀ times {}x{}",
                self.rows(),
                self.cols(),
                b.rows(),
                b.cols()
            );
        }
        let mut out = DenseMatrix::zeros(self.cols(), b.cols());
        for j in 0..b.cols() {
            let col = self.t_matvec(b.col(j))?;
            out.col_mut(j).copy_from_slice(&col);
        }
        Ok(out)
    }

    /// `x_jᵀ v` (logical column).
    #[inline]
    pub fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        let raw = match &*self.storage {
            Storage::Dense(m) => dot(m.col(j), v),
            Storage::Sparse(m) => m.col_dot(j, v),
        };
        self.scale * raw
    }

    /// `out += alpha * x_j` (logical column).
    #[inline]
    pub fn col_axpy(&self, j: usize, alpha: f64, out: &mut [f64]) {
        let a = alpha * self.scale;
        match &*self.storage {
            Storage::Dense(m) => axpy(a, m.col(j), out),
            Storage::Sparse(m) => {
                let (idx, val) = m.column(j);
                for (&i, &x) in idx.iter().zip(val) {
                    out[i] += a * x;
                }
            }
        }
    }

    /// `‖x_j‖²` (logical column).
    pub fn col_norm_sq(&self, j: usize) -> f64 {
        let raw = match &*self.storage {
            Storage::Dense(m) => dot(m.col(j), m.col(j)),
            Storage::Sparse(m) => m.column(j).1.iter().map(|x| x * x).sum(),
        };
        self.scale * self.scale * raw
    }

    /// Logical column `j` as a dense vector.
    pub fn col_dense(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.col_axpy(j, 1.0, &mut out);
        out
    }

    /// `Bᵀ x_j` for a `d x k` basis `B`, in `O(nnz(x_j) k)`.
    pub fn project_col(&self, j: usize, basis: &DenseMatrix) -> Vec<f64> {
        (0..basis.cols())
            .map(|l| self.col_dot(j, basis.col(l)))
            .collect()
    }

    #[inline]
    fn apply_scale(&self, v: &mut [f64]) {
        if self.scale != 1.0 {
            v.iter_mut().for_each(|x| *x *= self.scale);
        }
    }
}

impl PartialEq for DataMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.scale == other.scale && self.storage == other.storage
    }
}
