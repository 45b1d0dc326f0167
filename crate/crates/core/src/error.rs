use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter fails its validity constraint.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Semi-infinite integration asked for a non-positive decay scale.
    #[error("invalid integration domain: {0}")]
    InvalidDomain(String),

    /// Finite integration interval with a > b.
    #[error("invalid interval: a = {a} > b = {b}")]
    InvalidInterval { a: f64, b: f64 },

    /// Adaptive quadrature exhausted its subdivision budget. Carries the
    /// name of the offending integral so callers can report it.
    #[error("quadrature did not converge in {integral}: value {value:e}, error estimate {error_estimate:e}")]
    NonConvergence {
        integral: String,
        value: f64,
        error_estimate: f64,
    },

    /// A time grid violates the uniform/starts-at-zero contract.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Index past the end of a kernel cache.
    #[error("index {index} out of range for grid of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    /// Two-time quantities require t >= t'.
    #[error("invalid time order: t = {t} < t_prime = {t_prime}")]
    InvalidTimeOrder { t: f64, t_prime: f64 },

    /// A time does not land on the cache grid, or two traces disagree on
    /// their grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
