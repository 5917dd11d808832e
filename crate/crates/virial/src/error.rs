//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VirialError {
    /// A grid, field or operator specification violates its invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// Dimension or grid mismatch between two objects.
    #[error("shape error: {0}")]
    Shape(String),

    /// An iterative solver did not reach the requested tolerance.
    #[error("solver failure: achieved residual {achieved:.3e} after {iterations} iterations")]
    SolverFailure { achieved: f64, iterations: usize },

    /// Operation requested outside its domain of validity (e.g. d < 3 bounds).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The ultimate identity needs Re λ > 0.
    #[error("cone violation: Re λ = {0} is not positive")]
    ConeViolation(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, VirialError>;
