use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("size not feasible: {0}")]
    Infeasible(String),
    #[error("audit failed: {invariant} ({detail})")]
    Audit { invariant: String, detail: String },
    #[error("ill-conditioned fit: condition number {0:.3e}")]
    IllConditioned(f64),
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("non-finite Monte Carlo moment: {0}")]
    NonFinite(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn audit(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Audit { invariant: invariant.into(), detail: detail.into() }
    }
}
