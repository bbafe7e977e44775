use alloc::vec;
use alloc::vec::Vec;

use super::dense::DenseMatrix;
use crate::error::{bail, Result};

/// Compressed-sparse-column matrix. Columns are data points, so per-column
/// access is the hot path.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Validates raw CSC arrays: strictly increasing row indices per column,
    /// indices below `rows`, finite nonzero values.
    pub fn new(
        rows: usize,
        cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != cols + 1 || col_ptr[0] != 0 {
            bail!(InvalidDimension, "column pointer array has wrong shape");
        }
        if row_idx.len() != values.len() || *col_ptr.last().unwrap() != values.len() {
            bail!(
                InvalidDimension,
                "index/value arrays disagree with column pointers"
            );
        }
        for j in 0..cols {
            let (lo, hi) = (col_ptr[j], col_ptr[j + 1]);
            if lo > hi {
                bail!(InvalidInput, "column pointers decrease at column {}", j);
            }
            let idx = &row_idx[lo..hi];
            if idx.iter().any(|&r| r >= rows) {
                bail!(InvalidDimension, "row index out of range in column {}", j);
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                bail!(
                    InvalidInput,
                    "row indices not strictly increasing in column {}",
                    j
                );
            }
            if values[lo..hi].iter().any(|v| !v.is_finite() || *v == 0.0) {
                bail!(InvalidInput, "zero or non-finite value in column {}", j);
            }
        }
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds from per-column `(row, value)` lists. Explicit zeros are dropped.
    pub fn from_columns(rows: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for c in columns {
            for &(r, v) in c {
                if v != 0.0 {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(values.len());
        }
        Self::new(rows, columns.len(), col_ptr, row_idx, values)
    }

    /// Drops exact zeros from a dense matrix.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut col_ptr = Vec::with_capacity(m.cols() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..m.cols() {
            for (i, &v) in m.col(j).iter().enumerate() {
                if v != 0.0 {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(values.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            col_ptr,
            row_idx,
            values,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            let (idx, val) = self.column(j);
            let col = m.col_mut(j);
            for (&i, &v) in idx.iter().zip(val) {
                col[i] = v;
            }
        }
        m
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            bail!(
                InvalidDimension,
                "sparse matvec: {}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            );
        }
        let mut out = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            let (idx, val) = self.column(j);
            for (&i, &x) in idx.iter().zip(val) {
                out[i] += x * vj;
            }
        }
        Ok(out)
    }

    pub fn t_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            bail!(
                InvalidDimension,
                "sparse transposed matvec: {}x{} against vector of length {}",
                self.rows,
                self.cols,
                v.len()
            );
        }
        Ok((0..self.cols).map(|j| self.col_dot(j, v)).collect())
    }

    #[inline]
    pub fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        let (idx, val) = self.column(j);
        idx.iter().zip(val).map(|(&i, &x)| x * v[i]).sum()
    }
}
