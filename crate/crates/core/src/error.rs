use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("vector of length {0} is not a perfect square")]
    Shape(usize),

    #[error("matrix norm {0:e} too large to exponentiate")]
    Magnitude(f64),

    #[error("time ordering violated: t1 = {t1} precedes t0 = {t0}")]
    Ordering { t0: f64, t1: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("map is not completely positive (Choi eigenvalue {min_eigenvalue:e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("map is singular (condition number {condition:e})")]
    SingularMap { condition: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("ill-defined zero-frequency rate: one-sided limits {plus:e} and {minus:e} disagree or diverge; an Ohmic-type spectral density is required")]
    IllDefinedZeroFrequencyRate { plus: f64, minus: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("incomplete Bohr decomposition: no block at frequency {0}")]
    IncompleteDecomposition(f64),

    #[error("step instability at t = {time} (trace drift {drift:e})")]
    StepSize { drift: f64, time: f64 },

    #[error("eigen-solver did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
