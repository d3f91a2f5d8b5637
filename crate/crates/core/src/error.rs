use thiserror::Error;

/// Reasons a raw 0/1 table is rejected as a transition matrix.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("TooSmall: alphabet size {0} < 2")]
    TooSmall(usize),
    #[error("NotSquare: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("NotZeroOne: entry ({row}, {col}) is {value}")]
    NotZeroOne { row: usize, col: usize, value: i64 },
    #[error("NotIrreducible: {0}")]
    NotIrreducible(String),
    #[error("IsPermutation: every row and column has exactly one 1")]
    IsPermutation,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("NoConvergence: no convergence after {iterations} iterations ({what})")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("NotAdmissible: word {0} is not admissible")]
    NotAdmissible(String),
    #[error("WordTooShort: word of length {len} shorter than depth {depth}")]
    WordTooShort { len: usize, depth: usize },
    #[error("DepthTooSmall: requested depth {requested} below minimum {minimum}")]
    DepthTooSmall { requested: usize, minimum: usize },
    #[error("MatrixMismatch: operands live on different shift spaces")]
    MatrixMismatch,
    #[error("NoBracket: F has no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("NotDecodable: {0}")]
    NotDecodable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
