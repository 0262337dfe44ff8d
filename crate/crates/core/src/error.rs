use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("hamiltonian is not translation invariant; use diagonalize_dense or the per-site variant")]
    NotTranslationInvariant,

    #[error("{what}: n = {n} exceeds the configured cap of {cap}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },

    #[error("eigensolver backend failed: {0}")]
    Backend(String),

    #[error("quadrature did not converge (achieved error estimate {estimate:e}, requested {requested:e})")]
    Quadrature { estimate: f64, requested: f64 },

    #[error("probabilities are not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("spectrum carries no eigenvectors")]
    MissingEigenvectors,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
