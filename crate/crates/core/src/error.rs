use thiserror::Error;

/// Errors raised by the arithmetic, lattice and invariant layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field description: {0}")]
    InvalidField(String),
    #[error("invalid quadratic data: {0}")]
    InvalidQuadratic(String),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("division by zero")]
    DivisionByZero,
    /// The value is zero to the available precision, so its valuation or
    /// sign cannot be decided.
    #[error("indeterminate: value is zero to precision {prec}")]
    Indeterminate { prec: i64 },
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    /// A finite bound was too small to decide the question either way.
    #[error("undecidable at bound {bound}: {reason}")]
    Undecidable { bound: i64, reason: String },
    #[error("ideal basis did not stabilize within slack cap {cap}")]
    NonStabilization { cap: usize },
    #[error("no branch converged by N = {n_max}")]
    NonConvergence { n_max: usize },
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
