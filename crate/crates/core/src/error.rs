use thiserror::Error;

/// Errors raised by the structured matrix, splitting, and preconditioner code.
///
/// Block indices carried by variants are 1-based, matching how blocks are
/// numbered in the documentation (`D_1 .. D_N`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("diagonal block {block} is not symmetric (|D - D^T| = {deviation:e})")]
    NotSymmetric { block: usize, deviation: f64 },

    #[error("diagonal block {0} is not numerically positive definite")]
    NotPositiveDefinite(usize),

    #[error("assembled matrix is not symmetric positive definite")]
    NotSpd,

    #[error("invalid matrix shape: {0}")]
    InvalidShape(String),

    #[error("splitting weights (a={a}, b={b}) violate 2a + b = 1")]
    WeightsNotNormalized { a: f64, b: f64 },

    #[error("splitting weights (a={a}, b={b}) lie outside the guaranteed region a >= 0, b >= -1")]
    OutsideGuaranteedRegion { a: f64, b: f64 },

    #[error("polynomial step count must be at least 1")]
    ZeroSteps,

    #[error("lambda = {0} is outside the open interval (0, 1)")]
    DomainViolation(f64),

    #[error("input matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetricInput(f64),

    #[error("preconditioner operator is not numerically positive definite")]
    PreconditionerNotSpd,

    #[error("Schur complement of generated problem (seed {seed}) is not s.p.d.")]
    SchurNotSpd { seed: u64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
