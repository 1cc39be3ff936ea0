use thiserror::Error;

/// Errors raised by the transform library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("algebra level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("zero divisor: cannot invert a number of norm {0:e}")]
    ZeroDivisor(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("Re p = {re} lies outside the strip ({lo}, {hi})")]
    OutOfStrip { re: f64, lo: f64, hi: f64 },
    #[error("quadrature budget exhausted: {evals} evaluations, error estimate {err:e}")]
    Budget { evals: usize, err: f64 },
    #[error("singular system at p = {0}")]
    Singular(String),
    #[error("inversion did not stabilise: {0}")]
    NonConvergent(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
