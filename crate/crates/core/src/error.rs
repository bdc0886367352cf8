//! Error type shared across the crate.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by basis construction, assembly and the solver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Incompatible vector/matrix dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A pivot too small for the unpivoted band factorization.
    #[error("singular matrix: pivot {index} has magnitude {magnitude:.3e}")]
    SingularPivot { index: usize, magnitude: f64 },

    /// A user callback returned a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// An internal consistency check failed; indicates a construction bug.
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Invalid experiment or CLI configuration.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
