#![allow(dead_code)]

use ridgesketch_core::linalg::{gaussian_matrix, DataMatrix, DenseMatrix, SparseMatrix};

/// `d x n` Gaussian matrix whose row `i` is scaled by `1/(i+1)^power`.
pub fn decaying_matrix(d: usize, n: usize, power: f64, seed: u64) -> DenseMatrix {
    let mut x = gaussian_matrix(d, n, seed).unwrap();
    for i in 0..d {
        let s = 1.0 / ((i + 1) as f64).powf(power);
        for j in 0..n {
            x.set(i, j, x.get(i, j) * s);
        }
    }
    x
}

/// Deterministic sparse matrix with a few nonzeros per column.
pub fn patterned_sparse(d: usize, n: usize, salt: usize) -> SparseMatrix {
    let cols: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            (0..d)
                .filter(|j| (i * 7 + j * 3 + salt).is_multiple_of(5))
                .map(|j| (j, 0.5 + ((i + 2 * j + salt) % 7) as f64 * 0.25))
                .collect()
        })
        .collect();
    SparseMatrix::from_columns(d, &cols).unwrap()
}

pub fn dense(x: DenseMatrix) -> DataMatrix {
    DataMatrix::dense(x)
}

pub fn unit_vector(d: usize, seed: u64) -> Vec<f64> {
    let g = gaussian_matrix(d, 1, seed).unwrap();
    let n = g.col(0).iter().map(|x| x * x).sum::<f64>().sqrt();
    g.col(0).iter().map(|x| x / n).collect()
}
