use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("constraint {context}: references unknown variable index {index}")]
    UnknownVariable { context: String, index: usize },

    #[error("problem is unbounded")]
    Unbounded,

    #[error("simplex iteration limit reached after {iterations} iterations")]
    IterationLimit { iterations: usize },

    #[error("basis factorization failed: {0}")]
    NumericalFailure(String),

    #[error("{0}")]
    InvalidName(String),

    #[error("fix value {value} for variable {name} lies outside its bounds [{lower}, {upper}]")]
    FixOutOfBounds {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("solution file: {0}")]
    SolutionFile(String),

    #[error("imported point rejected: {reason}; worst violations: {details}")]
    InfeasiblePoint { reason: String, details: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
