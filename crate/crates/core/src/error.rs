use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index error: {what} = {index} exceeds {bound}")]
    Index {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// An iterative method ran out of iterations or bracket room.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// The scalar equation at grid node `n` could not be solved.
    #[error("scalar solve failed at node n = {n} (rhs = {rhs:e}): {reason}")]
    ScalarSolve { n: usize, rhs: f64, reason: String },

    /// The shooting map never straddled the target value.
    #[error("could not bracket the wetting front: {0}")]
    Bracket(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
