//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid simplex vector: {0}")]
    InvalidSimplexVector(String),

    #[error("invalid tangent vector: {0}")]
    InvalidTangentVector(String),

    #[error("matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("matrix is reducible: {0}")]
    Reducible(String),

    #[error("invalid reinforcement spec: {0}")]
    InvalidReinforcement(String),

    #[error("argument outside domain: {0}")]
    OutOfDomain(String),

    /// The requested operation is defined, but not for this model's
    /// structure or parameter regime.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("not a fixed point: residual {0:.3e} exceeds {1:.3e}")]
    NotFixedPoint(f64, f64),

    #[error("invalid periodic orbit: {0}")]
    InvalidOrbit(String),
}
