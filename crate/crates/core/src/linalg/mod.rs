//! Dense and sparse storage plus the deterministic kernels used by every
//! other module: Gaussian sampling, orthonormalization, small SVD and the
//! symmetric eigensolver.

mod data;
mod dense;
mod eigen;
mod kernels;
mod ops;
mod sparse;
mod svd;

pub use data::{DataMatrix, Storage};
pub use dense::DenseMatrix;
pub use eigen::{spd_solve, sym_eigs, SymEigen, SYMMETRY_TOL};
pub use kernels::{gaussian_matrix, orthonormalize, RANK_DROP_TOL};
pub use ops::{axpy, dot, max_abs_diff, norm2, scale, sub};
pub use sparse::SparseMatrix;
pub use svd::{small_svd, SvdFactors, GRAM_ROUTE_MAX_DIM};

pub(crate) use kernels::extend_basis;
pub(crate) use svd::{gram_svd, leading_entry_negative};
