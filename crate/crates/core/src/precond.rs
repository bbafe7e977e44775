//! Rank-`k` structured preconditioners and condition-number diagnostics.
//!
//! A preconditioner is stored as an orthonormal basis `Ũ` (`d x k`), the
//! per-direction coefficients `1/√(σ̃_i² + λ)` and a tail coefficient
//! `c = 1/√(σ̃_k² + λ)` acting on the orthogonal complement:
//!
//! `P^{-1/2} v = c v + Ũ (diag(coeffs) − c I) Ũᵀ v`
//!
//! The complement is never materialized, so applying `P^{±1/2}` costs
//! `O(dk)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::linalg::{dot, sym_eigs, DataMatrix, DenseMatrix};
use crate::sketch::SketchedSvd;

/// Largest dimension for which the dense diagnostics will run.
pub const DIAGNOSTIC_MAX_DIM: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    /// Built from a Block Lanczos sketch.
    Sketched,
    /// Built from the exact top-`k` SVD.
    Exact,
    Identity,
    /// Full whitening `(C + λI)^{-1/2}`; diagnostics only.
    Optimal,
}

#[derive(Debug, Clone)]
pub struct Preconditioner {
    basis: DenseMatrix,
    inv_sqrt_diag: Vec<f64>,
    tail: f64,
    lambda: f64,
    kind: PrecondKind,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        bail!(InvalidParameter, "lambda must be positive, got {}", lambda);
    }
    Ok(())
}

impl Preconditioner {
    /// `P = I` on `ℝ^d`.
    pub fn identity(d: usize, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            basis: DenseMatrix::zeros(d, 0),
            inv_sqrt_diag: Vec::new(),
            tail: 1.0,
            lambda,
            kind: PrecondKind::Identity,
        })
    }

    /// Sketched preconditioner from Block Lanczos factors.
    pub fn sketched(sv: &SketchedSvd, lambda: f64) -> Result<Self> {
        Self::from_factors(sv, lambda, PrecondKind::Sketched)
    }

    /// Same construction from exact factors.
    pub fn exact(sv: &SketchedSvd, lambda: f64) -> Result<Self> {
        Self::from_factors(sv, lambda, PrecondKind::Exact)
    }

    fn from_factors(sv: &SketchedSvd, lambda: f64, kind: PrecondKind) -> Result<Self> {
        check_lambda(lambda)?;
        if sv.k() == 0 {
            bail!(
                InvalidParameter,
                "preconditioner needs at least one direction"
            );
        }
        let inv_sqrt_diag: Vec<f64> = sv
            .singular_values
            .iter()
            .map(|s| 1.0 / libm::sqrt(s * s + lambda))
            .collect();
        let tail = *inv_sqrt_diag.last().unwrap();
        Ok(Self {
            basis: sv.left.clone(),
            inv_sqrt_diag,
            tail,
            lambda,
            kind,
        })
    }

    /// `(C + λI)^{-1/2}` for `C = X̄X̄ᵀ`, via a dense eigensolve.
    pub fn optimal(normalized_data: &DataMatrix, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let spec = dense_covariance_eigs(normalized_data)?;
        let inv_sqrt_diag: Vec<f64> = spec
            .values
            .iter()
            .map(|&l| 1.0 / libm::sqrt(l.max(0.0) + lambda))
            .collect();
        let tail = *inv_sqrt_diag.last().unwrap();
        Ok(Self {
            basis: spec.vectors,
            inv_sqrt_diag,
            tail,
            lambda,
            kind: PrecondKind::Optimal,
        })
    }

    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Number of explicitly represented directions.
    pub fn rank(&self) -> usize {
        self.inv_sqrt_diag.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn inv_sqrt_diag(&self) -> &[f64] {
        &self.inv_sqrt_diag
    }

    pub fn tail_coeff(&self) -> f64 {
        self.tail
    }

    /// `λ_min(P^{-1})`.
    pub fn min_inv_eigenvalue(&self) -> f64 {
        self.inv_sqrt_diag
            .iter()
            .fold(self.tail * self.tail, |m, c| m.min(c * c))
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            bail!(
                InvalidDimension,
                "vector of length {} for a preconditioner on R^{}",
                v.len(),
                self.dim()
            );
        }
        Ok(())
    }

    fn apply_with(&self, v: &[f64], coeff: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let tail = coeff(self.tail);
        let mut out: Vec<f64> = v.iter().map(|x| tail * x).collect();
        for (j, &c) in self.inv_sqrt_diag.iter().enumerate() {
            let u = self.basis.col(j);
            let w = (coeff(c) - tail) * dot(u, v);
            if w != 0.0 {
                crate::linalg::axpy(w, u, &mut out);
            }
        }
        Ok(out)
    }

    /// `P^{-1/2} v`.
    pub fn apply_inv_sqrt(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply_with(v, |c| c)
    }

    /// `P^{1/2} v`, the exact inverse of [`Self::apply_inv_sqrt`].
    pub fn apply_sqrt(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply_with(v, |c| 1.0 / c)
    }

    /// `‖P^{-1/2} v‖²` from `‖v‖²` and the projections `Ũᵀv`, in `O(k)`.
    pub fn inv_sqrt_norm_sq(&self, norm_sq: f64, projection: &[f64]) -> f64 {
        let c2 = self.tail * self.tail;
        let mut s = c2 * norm_sq;
        for (&c, &p) in self.inv_sqrt_diag.iter().zip(projection) {
            s += (c * c - c2) * p * p;
        }
        s.max(0.0)
    }

    /// Dense `P^{-1/2}`; test scale only.
    pub fn to_dense_inv_sqrt(&self) -> DenseMatrix {
        let d = self.dim();
        let mut m = DenseMatrix::zeros(d, d);
        let mut e = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            let col = self.apply_inv_sqrt(&e).expect("matching length");
            m.col_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        m
    }
}

/// Eigenvalues of `C = X̄X̄ᵀ` together with the regularization `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    eigenvalues: Vec<f64>,
    lambda: f64,
}

impl SpectrumSummary {
    /// Sorts descending; tiny negative round-off is clamped to zero.
    pub fn new(mut eigenvalues: Vec<f64>, lambda: f64) -> Result<Self> {
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            bail!(InvalidInput, "non-finite eigenvalue");
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let top = eigenvalues.first().map_or(0.0, |x| x.abs());
        for x in eigenvalues.iter_mut() {
            if *x < 0.0 {
                if *x < -1e-10 * top.max(1e-300) {
                    bail!(
                        InvalidInput,
                        "negative eigenvalue {} in a covariance spectrum",
                        x
                    );
                }
                *x = 0.0;
            }
        }
        Ok(Self {
            eigenvalues,
            lambda,
        })
    }

    /// `λ_i = σ_i²`, zero-padded to dimension `d`.
    pub fn from_singular_values(sigma: &[f64], d: usize, lambda: f64) -> Result<Self> {
        if sigma.len() > d {
            bail!(
                InvalidDimension,
                "{} singular values for dimension {}",
                sigma.len(),
                d
            );
        }
        let mut ev: Vec<f64> = sigma.iter().map(|s| s * s).collect();
        ev.resize(d, 0.0);
        Self::new(ev, lambda)
    }

    /// Spectrum of `X̄X̄ᵀ` by a dense eigensolve (`d ≤ 2000`).
    pub fn from_data(normalized_data: &DataMatrix, lambda: f64) -> Result<Self> {
        Self::new(dense_covariance_eigs(normalized_data)?.values, lambda)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn dense_covariance_eigs(normalized_data: &DataMatrix) -> Result<crate::linalg::SymEigen> {
    let d = normalized_data.rows();
    if d > DIAGNOSTIC_MAX_DIM {
        bail!(
            ScaleGuard,
            "dimension {} exceeds the dense limit {}",
            d,
            DIAGNOSTIC_MAX_DIM
        );
    }
    sym_eigs(&normalized_data.to_dense().gram_outer())
}

/// `Σ_i (λ_i + λ) / (λ_d + λ)`.
pub fn avg_condition_number(spec: &SpectrumSummary) -> Result<f64> {
    let Some(&last) = spec.eigenvalues.last() else {
        bail!(InvalidInput, "empty spectrum");
    };
    let denom = last + spec.lambda;
    if !(denom > 0.0) {
        bail!(InvalidInput, "λ_d + λ must be positive, got {}", denom);
    }
    let trace: f64 = spec.eigenvalues.iter().map(|l| l + spec.lambda).sum();
    Ok(trace / denom)
}

/// Predicted speed-up `Σ_i λ_i / (k λ_k + Σ_{i>k} λ_i)`.
pub fn theoretical_ratio(spec: &SpectrumSummary, k: usize) -> Result<f64> {
    let ev = &spec.eigenvalues;
    if k == 0 || k > ev.len() {
        bail!(InvalidParameter, "k={} must lie in [1, {}]", k, ev.len());
    }
    let tail: f64 = ev[k..].iter().sum();
    let total = ev[..k].iter().sum::<f64>() + tail;
    let denom = k as f64 * ev[k - 1] + tail;
    if !(denom > 0.0) {
        bail!(
            DegenerateSpectrum,
            "k λ_k + Σ_(i>k) λ_i vanishes at k={}",
            k
        );
    }
    Ok(total / denom)
}

/// Dense `M = P^{-1/2} (C + λI) P^{-1/2}` for `C = X̄X̄ᵀ` (`d ≤ 2000`).
pub fn conditioned_matrix(
    normalized_data: &DataMatrix,
    lambda: f64,
    p: &Preconditioner,
) -> Result<DenseMatrix> {
    let d = normalized_data.rows();
    if d > DIAGNOSTIC_MAX_DIM {
        bail!(
            ScaleGuard,
            "dimension {} exceeds the dense limit {}",
            d,
            DIAGNOSTIC_MAX_DIM
        );
    }
    if p.dim() != d {
        bail!(
            InvalidDimension,
            "preconditioner on R^{} for data in R^{}",
            p.dim(),
            d
        );
    }
    let mut m = DenseMatrix::zeros(d, d);
    let mut e = vec![0.0; d];
    for j in 0..d {
        e[j] = 1.0;
        let a = p.apply_inv_sqrt(&e)?;
        e[j] = 0.0;
        let mut b = normalized_data.matvec(&normalized_data.t_matvec(&a)?)?;
        b.iter_mut().zip(&a).for_each(|(bi, ai)| *bi += lambda * ai);
        let col = p.apply_inv_sqrt(&b)?;
        m.col_mut(j).copy_from_slice(&col);
    }
    // Symmetrize round-off.
    for j in 0..d {
        for i in 0..j {
            let avg = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, avg);
            m.set(j, i, avg);
        }
    }
    Ok(m)
}

/// Eigenvalues (descending) of the conditioned matrix.
pub fn conditioned_spectrum(
    normalized_data: &DataMatrix,
    lambda: f64,
    p: &Preconditioner,
) -> Result<Vec<f64>> {
    Ok(sym_eigs(&conditioned_matrix(normalized_data, lambda, p)?)?.values)
}

/// `κ̃ = tr(M) / λ_min(M)` for the conditioned matrix `M`.
pub fn conditioned_condition_number(
    normalized_data: &DataMatrix,
    lambda: f64,
    p: &Preconditioner,
) -> Result<f64> {
    let m = conditioned_matrix(normalized_data, lambda, p)?;
    let trace = m.trace();
    let ev = sym_eigs(&m)?.values;
    let smallest = *ev.last().unwrap();
    if !(smallest > 0.0) {
        bail!(
            DegenerateSpectrum,
            "conditioned matrix is not positive definite"
        );
    }
    Ok(trace / smallest)
}

/// Upper bound `(k λ_k + Σ_{i>k} λ_i)/λ + d` on `κ̃` for the exact rank-`k`
/// preconditioner.
pub fn exact_preconditioner_bound(spec: &SpectrumSummary, k: usize) -> Result<f64> {
    let ev = &spec.eigenvalues;
    if k == 0 || k > ev.len() {
        bail!(InvalidParameter, "k={} must lie in [1, {}]", k, ev.len());
    }
    let tail: f64 = ev[k..].iter().sum();
    Ok((k as f64 * ev[k - 1] + tail) / spec.lambda + ev.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, norm2, orthonormalize};

    fn toy_sketch() -> SketchedSvd {
        let u = orthonormalize(&gaussian_matrix(6, 2, 1).unwrap()).unwrap();
        let v = orthonormalize(&gaussian_matrix(8, 2, 2).unwrap()).unwrap();
        SketchedSvd {
            left: u,
            singular_values: vec![2.0, 1.0],
            right: v,
            q: 3,
            requested_k: 2,
        }
    }

    #[test]
    fn sketched_coefficients() {
        let p = Preconditioner::sketched(&toy_sketch(), 1.0).unwrap();
        let s5 = 1.0 / libm::sqrt(5.0);
        let s2 = 1.0 / libm::sqrt(2.0);
        assert!((p.inv_sqrt_diag()[0] - s5).abs() < 1e-15);
        assert!((p.inv_sqrt_diag()[1] - s2).abs() < 1e-15);
        assert!((p.tail_coeff() - s2).abs() < 1e-15);
        assert_eq!(p.kind(), PrecondKind::Sketched);
    }

    #[test]
    fn eigen_action_and_tail() {
        let sv = toy_sketch();
        let p = Preconditioner::sketched(&sv, 1.0).unwrap();
        let u1 = sv.left.col(0);
        let out = p.apply_inv_sqrt(u1).unwrap();
        for (o, u) in out.iter().zip(u1) {
            assert!((o - u / libm::sqrt(5.0)).abs() < 1e-12);
        }
        let back = p.apply_sqrt(u1).unwrap();
        for (o, u) in back.iter().zip(u1) {
            assert!((o - u * libm::sqrt(5.0)).abs() < 1e-12);
        }
        // A vector orthogonal to span(Ũ).
        let full = orthonormalize(&{
            let mut m = sv.left.clone();
            m.push_col(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
            m
        })
        .unwrap();
        let w = full.col(2);
        let out = p.apply_inv_sqrt(w).unwrap();
        for (o, x) in out.iter().zip(w) {
            assert!((o - x / libm::sqrt(2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_lambda_and_length() {
        assert!(Preconditioner::sketched(&toy_sketch(), 0.0).is_err());
        assert!(Preconditioner::identity(3, -1.0).is_err());
        let p = Preconditioner::identity(3, 1.0).unwrap();
        assert!(matches!(
            p.apply_inv_sqrt(&[1.0, 2.0]),
            Err(crate::Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn identity_and_zero() {
        let p = Preconditioner::identity(3, 0.5).unwrap();
        assert_eq!(
            p.apply_inv_sqrt(&[1.0, -2.0, 3.0]).unwrap(),
            [1.0, -2.0, 3.0]
        );
        assert_eq!(p.apply_sqrt(&[1.0, -2.0, 3.0]).unwrap(), [1.0, -2.0, 3.0]);
        let q = Preconditioner::sketched(&toy_sketch(), 0.3).unwrap();
        assert!(q
            .apply_inv_sqrt(&[0.0; 6])
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn structured_norm_matches_dense() {
        let sv = toy_sketch();
        let p = Preconditioner::sketched(&sv, 0.2).unwrap();
        let v = [0.3, -1.0, 2.0, 0.0, 0.5, 1.5];
        let proj = sv.left.t_matvec(&v).unwrap();
        let fast = p.inv_sqrt_norm_sq(dot(&v, &v), &proj);
        let slow = norm2(&p.apply_inv_sqrt(&v).unwrap()).powi(2);
        assert!((fast - slow).abs() < 1e-12 * slow);
    }

    #[test]
    fn avg_condition_examples() {
        let s = SpectrumSummary::new(vec![0.0; 7], 1.0).unwrap();
        assert_eq!(avg_condition_number(&s).unwrap(), 7.0);
        let s = SpectrumSummary::new(vec![4.0, 1.0, 0.01], 0.1).unwrap();
        let expected = (4.1 + 1.1 + 0.11) / 0.11;
        assert!((avg_condition_number(&s).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 48.2727).abs() < 1e-3);
        let empty = SpectrumSummary::new(vec![], 1.0).unwrap();
        assert!(avg_condition_number(&empty).is_err());
    }

    #[test]
    fn ratio_examples() {
        let s = SpectrumSummary::new(vec![5.0, 3.0, 1.0, 0.5], 1.0).unwrap();
        assert_eq!(theoretical_ratio(&s, 1).unwrap(), 1.0);
        let flat = SpectrumSummary::new(vec![0.7; 10], 1.0).unwrap();
        for k in 1..=10 {
            assert!((theoretical_ratio(&flat, k).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(theoretical_ratio(&s, 0).is_err());
        assert!(theoretical_ratio(&s, 5).is_err());
        let zero = SpectrumSummary::new(vec![0.0; 3], 1.0).unwrap();
        assert!(matches!(
            theoretical_ratio(&zero, 2),
            Err(crate::Error::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn spectrum_rejects_negative() {
        assert!(SpectrumSummary::new(vec![1.0, -0.5], 1.0).is_err());
        let s = SpectrumSummary::new(vec![1.0, -1e-18], 1.0).unwrap();
        assert_eq!(s.eigenvalues(), [1.0, 0.0]);
    }
}
