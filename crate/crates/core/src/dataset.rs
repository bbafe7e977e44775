//! Labeled datasets, the synthetic instance generator and average-norm
//! scaling. Corpus files are read by the companion `ridgesketch` crate.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{bail, Result};
use crate::linalg::{orthonormalize, DataMatrix, DenseMatrix};
use crate::solver::RidgeProblem;

/// Singular value profile of a synthetic instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    /// `σ_q = 1/q`.
    Linear,
    /// `σ_q = 1/q²`.
    Quadratic,
}

impl Decay {
    /// `σ_q` for 1-based `q`.
    pub fn singular_value(self, q: usize) -> f64 {
        let q = q as f64;
        match self {
            Decay::Linear => 1.0 / q,
            Decay::Quadratic => 1.0 / (q * q),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub decay: Decay,
    pub noise_std: f64,
    pub seed: u64,
    /// Replaces the randomly drawn `w*` when set.
    pub planted: Option<Vec<f64>>,
}

impl SyntheticSpec {
    pub fn new(n: usize, d: usize, decay: Decay, seed: u64) -> Self {
        Self {
            n,
            d,
            decay,
            noise_std: 0.1,
            seed,
            planted: None,
        }
    }

    pub fn with_noise(mut self, noise_std: f64) -> Self {
        self.noise_std = noise_std;
        self
    }

    pub fn with_planted(mut self, w: Vec<f64>) -> Self {
        self.planted = Some(w);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            bail!(InvalidParameter, "synthetic instance needs n, d >= 1");
        }
        if self.d > self.n {
            bail!(
                InvalidParameter,
                "synthetic instances need d <= n, got d={} n={}",
                self.d,
                self.n
            );
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            bail!(
                InvalidParameter,
                "noise_std must be non-negative, got {}",
                self.noise_std
            );
        }
        if let Some(w) = &self.planted {
            if w.len() != self.d {
                bail!(
                    InvalidDimension,
                    "planted vector of length {} for d={}",
                    w.len(),
                    self.d
                );
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Synthetic(SyntheticSpec),
    File(String),
}

/// Data points as the columns of a `d x n` matrix, one label per column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub labels: Vec<f64>,
    pub provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(data: DataMatrix, labels: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if labels.len() != data.cols() {
            bail!(
                InvalidDimension,
                "{} labels for {} data points",
                labels.len(),
                data.cols()
            );
        }
        Ok(Self {
            data,
            labels,
            provenance,
        })
    }

    pub fn n(&self) -> usize {
        self.data.cols()
    }

    pub fn d(&self) -> usize {
        self.data.rows()
    }

    pub fn ridge_problem(&self, lambda: f64) -> Result<RidgeProblem> {
        RidgeProblem::new(self.data.clone(), self.labels.clone(), lambda)
    }
}

fn gaussian_fill(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    DenseMatrix::new(rows, cols, data).expect("finite samples")
}

fn orthonormal_factor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Result<DenseMatrix> {
    let q = orthonormalize(&gaussian_fill(rng, rows, cols))?;
    if q.cols() != cols {
        bail!(DegenerateData, "Gaussian factor lost rank");
    }
    Ok(q)
}

struct Draw {
    raw: DenseMatrix,
    planted: Vec<f64>,
    noise: Vec<f64>,
}

fn draw(spec: &SyntheticSpec) -> Result<Draw> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u = orthonormal_factor(&mut rng, d, d)?;
    let mut v = orthonormal_factor(&mut rng, n, d)?;
    for q in 0..d {
        let s = spec.decay.singular_value(q + 1);
        v.col_mut(q).iter_mut().for_each(|x| *x *= s);
    }
    let raw = u.matmul(&v.transpose())?;
    let drawn: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let noise: Vec<f64> = (0..n)
        .map(|_| spec.noise_std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(Draw {
        raw,
        planted: spec.planted.clone().unwrap_or(drawn),
        noise,
    })
}

/// `X = U diag(σ) Vᵀ` before column normalization.
pub fn synthetic_raw_matrix(spec: &SyntheticSpec) -> Result<DenseMatrix> {
    Ok(draw(spec)?.raw)
}

/// Synthetic instance: `X = U diag(σ) Vᵀ` with Haar-like orthonormal `U`
/// (`d x d`) and `V` (`n x d`), columns then scaled to unit norm, and labels
/// `y_i = w*ᵀx_i + z_i`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    let Draw {
        mut raw,
        planted,
        noise,
    } = draw(spec)?;
    for j in 0..spec.n {
        let col = raw.col_mut(j);
        let norm = libm::sqrt(col.iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            bail!(DegenerateData, "synthetic column {} vanished", j);
        }
        col.iter_mut().for_each(|x| *x /= norm);
    }
    let data = DataMatrix::dense(raw);
    let labels: Vec<f64> = (0..spec.n)
        .map(|j| data.col_dot(j, &planted) + noise[j])
        .collect();
    LabeledDataset::new(data, labels, Provenance::Synthetic(spec.clone()))
}

/// `(1/n) Σ ‖x_i‖`.
pub fn mean_column_norm(data: &DataMatrix) -> f64 {
    let n = data.cols();
    (0..n).map(|j| libm::sqrt(data.col_norm_sq(j))).sum::<f64>() / n.max(1) as f64
}

/// Divides every column by the mean column norm.
pub fn average_norm_normalize(ds: LabeledDataset) -> Result<LabeledDataset> {
    let mean = mean_column_norm(&ds.data);
    if !(mean > 0.0) {
        bail!(DegenerateData, "every data point is zero");
    }
    let data = ds.data.scaled(1.0 / mean)?;
    Ok(LabeledDataset { data, ..ds })
}
