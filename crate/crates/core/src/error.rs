use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid elastic constants: {0}")]
    InvalidConstants(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("step rejected: CFL limit {limit:e} exceeded by dt {dt:e} after {halvings} halvings")]
    CflViolation { dt: f64, limit: f64, halvings: u32 },
    #[error("director collapsed (min |d| = {min_norm:e}) at t = {t}: blow-up suspect")]
    RenormalizationFailure { min_norm: f64, t: f64 },
    #[error("unknown initial data kind `{0}`")]
    UnknownInitKind(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
