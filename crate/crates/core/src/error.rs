use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("nominal distribution has a zero component at index {index}")]
    ZeroNominal { index: usize },

    #[error("invalid radius {0}: must be finite and > 0")]
    InvalidRadius(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("multiplier lambda[{index}] = {value} is not admissible")]
    InvalidMultiplier { index: usize, value: f64 },

    #[error("infeasible polytope: alternating projections did not converge after {iterations} iterations (residual {residual:e})")]
    Infeasible { iterations: usize, residual: f64 },

    #[error("objective returned a non-finite value at a feasible point")]
    NonFiniteObjective,

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("hitting time is infinite: goal {goal} is unreachable")]
    Unreachable { goal: usize },

    #[error("trajectory exceeded {cap} steps without reaching goal {goal}")]
    TrajectoryCap { goal: usize, cap: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
