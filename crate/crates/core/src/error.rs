use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("object {0} has invalid shape parameters")]
    InvalidObject(usize),
    #[error("object {0} contains no integer grid point")]
    EmptyPiercing(usize),
    #[error("object {id} does not satisfy the size bound for psi = {psi}")]
    PsiBoundViolated { id: usize, psi: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no acceptable separator found after {0} attempts")]
    SeparatorNotFound(usize),
    #[error("zero pivot at elimination step {0}")]
    ZeroPivot(usize),
    #[error("elimination order inconsistent with separator tree: {0}")]
    InconsistentOrder(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("row {0} was deleted on a zero pivot but is not null")]
    RankMismatch(usize),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("retry budget exhausted after {0} attempts")]
    RetryExhausted(usize),
    #[error("graph with {0} vertices is too large for exhaustive search")]
    TooLarge(usize),
    #[error("query point is not interior to disk {0}")]
    PointNotInterior(usize),
    #[error("instance generation failed: {0}")]
    GenerationFailed(String),
    #[error("invalid separator tree: {0}")]
    InvalidTree(String),
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
