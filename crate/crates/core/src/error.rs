use alloc::string::String;

use crate::svrg::ConvergenceTrace;

/// Errors produced by the numerical kernels, solvers and generators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every column of the input vanished under the rank-drop tolerance.
    #[error("input spans an empty basis")]
    EmptyBasis,

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("scale guard exceeded: {0}")]
    ScaleGuard(String),

    /// SVRG produced a non-finite or exploding objective. Carries the epochs
    /// completed before the abort.
    #[error("divergence at epoch {epoch}: objective {objective}")]
    Divergence {
        epoch: usize,
        objective: f64,
        trace: ConvergenceTrace,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
