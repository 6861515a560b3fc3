use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("kernel size matrix at ({row}, {col}) is not symmetric positive definite")]
    NotPositiveDefinite { row: usize, col: usize },

    #[error("covariance sum is singular (det = {det:e})")]
    SingularCovariance { det: f64 },

    #[error(
        "covariance factorization failed with jitter {jitter:e}; minimum eigenvalue estimate {min_eigenvalue:e}"
    )]
    Factorization { jitter: f64, min_eigenvalue: f64 },

    #[error("dense sampler limited to {limit} pixels, got {pixels}")]
    TooLarge { pixels: usize, limit: usize },

    #[error("texture has zero variance")]
    ZeroVariance,

    #[error("subsample grid is empty: image side {side} is smaller than patch side {patch}")]
    EmptyGrid { side: usize, patch: usize },

    #[error("no analytic covariance is available for image-backed textures")]
    NoOracle,

    #[error("exhaustive permutation search supports k <= 8, got k = {0}")]
    TooManyLabels(usize),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
