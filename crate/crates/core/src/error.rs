use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Scalar payloads are widened to `f64` so the error type does not depend on
/// the solver's scalar type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Shapes or quadratures that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// A parameter outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A field value outside the domain of an operation (e.g. negative density).
    #[error("domain error: {what} at cell {cell} (value {value})")]
    Domain {
        what: String,
        cell: usize,
        value: f64,
    },

    /// Time step violating a stability or positivity restriction.
    #[error("step-size error: {what}: dt = {dt} exceeds limit {limit}")]
    StepSize { what: String, dt: f64, limit: f64 },

    /// Krylov solve that did not reach its tolerance.
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    /// Fixed-point iteration that failed to converge on every admissible slab.
    #[error("fixed-point iteration failed: {message} (slab length {slab_length}, gamma history {gamma_history:?})")]
    Iteration {
        message: String,
        slab_length: f64,
        gamma_history: Vec<f64>,
    },

    /// Missing or inconsistent configuration of a model.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
