use ncadmm_core::{AdmmError, NumericsError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CtError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("window thresholds must be strictly increasing and inside the energy range: {0:?}")]
    Thresholds(Vec<f64>),
    #[error("invalid spectral configuration: {0}")]
    Spectral(String),
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("expected photon count {mean} for window {window}, ray {ray} is not a valid Poisson mean")]
    BadMean { window: usize, ray: usize, mean: f64 },
    #[error("Newton system for ray {ray} is not positive definite")]
    Singular { ray: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("gradient of the loss at zero vanishes")]
    ZeroReferenceGradient,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Admm(#[from] AdmmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
