use crate::copula::CopulaFamily;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum VineError {
    #[error("argument {value} lies outside the open unit interval")]
    Domain { value: f64 },
    #[error("{family} parameter {theta} lies outside the family's domain")]
    Parameter { family: CopulaFamily, theta: f64 },
    #[error("Kendall's tau {tau} is not attainable by the {family} family")]
    TauRange { family: CopulaFamily, tau: f64 },
    #[error("root finder did not converge after {iterations} iterations")]
    Convergence { iterations: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("edge {edge} at level {level} has no fitted parent edges")]
    MissingParent { level: usize, edge: String },
    #[error("invalid vine structure: {0}")]
    InvalidStructure(String),
    #[error("model document error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("gradient contains non-finite entries")]
    NonFiniteGradient,
    #[error("training diverged: objective was non-finite for {0} consecutive steps")]
    Divergence(usize),
    #[error("reference log-likelihood {0} is within 1e-6 of zero")]
    ZeroReference(f64),
    #[error("empty action space at level {level}")]
    EmptyActionSpace { level: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = VineError> = std::result::Result<T, E>;
