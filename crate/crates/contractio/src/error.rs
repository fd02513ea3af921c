use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("eigensolver failed to converge within {0} iterations")]
    EigNonConvergence(usize),
    #[error("quadrature reached error {achieved:.3e}, requested {requested:.3e} (value {value:.6e})")]
    Quadrature {
        value: f64,
        achieved: f64,
        requested: f64,
    },
    #[error("estimate is empty: all {0} samples were skipped")]
    EmptyEstimate(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
