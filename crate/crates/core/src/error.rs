use thiserror::Error;

/// Error type shared by all exact and sampling operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("pole region: {0}")]
    PoleRegion(String),
    #[error("not self-adjoint: {0}")]
    NotSelfAdjoint(String),
    #[error("incomplete basis: {0}")]
    IncompleteBasis(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("degree bound violation: {0}")]
    DegreeBound(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
