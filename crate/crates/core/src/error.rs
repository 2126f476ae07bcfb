use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid flux profile: {0}")]
    ProfileInvalid(String),

    #[error("invalid chart: {0}")]
    ChartInvalid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("classification gate failed: {0}")]
    GateFailure(String),

    #[error("solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("barrier not found: {0}")]
    BarrierNotFound(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
