//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("Toeplitz first column must have a real leading entry (|Im z[0]| = {0:.3e})")]
    InvalidDiagonal(f64),

    #[error("matrix is not PSD within tolerance (lambda_min = {0:.3e})")]
    NotPsd(f64),

    #[error("requested K = {k} sources but the smoothed covariance supports at most {max} (subspace dimension)")]
    Subspace { k: usize, max: usize },

    #[error("under-resolved spectrum: found {found} local maxima, needed {needed}")]
    UnderResolved { found: usize, needed: usize },

    #[error("ADMM diverged at iteration {iter} (residual {residual:.3e})")]
    Divergence { iter: usize, residual: f64 },

    #[error("covariance is singular (noise power must be positive)")]
    SingularCovariance,

    #[error("Fisher information matrix is singular; no bound available")]
    SingularFim,

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("bad config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
