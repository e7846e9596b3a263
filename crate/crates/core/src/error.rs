use thiserror::Error;

/// Errors raised by model validation and the numeric kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("empty matrix")]
    Empty,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is singular to tolerance: pivot {pivot:e} below {threshold:e} at column {column}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("numeric failure in {context}: magnitude {magnitude:e}")]
    NumericFailure {
        context: &'static str,
        magnitude: f64,
    },

    #[error("{matrix}[{row}][{col}] = {value}: {rule}")]
    SignPattern {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
        rule: &'static str,
    },

    #[error("row {row} of Q = C + D does not sum to zero (residual {residual:e})")]
    RowSum { row: usize, residual: f64 },

    #[error("generator is reducible: phases {closed_subset:?} form a closed class")]
    Reducible { closed_subset: Vec<usize> },

    #[error("D is identically zero; the process has no events")]
    NoEvents,

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("model class is {found}, operation requires {expected}")]
    WrongClass {
        expected: &'static str,
        found: &'static str,
    },

    #[error("routes disagree for {quantity}: {first} vs {second}")]
    RouteDisagreement {
        quantity: &'static str,
        first: f64,
        second: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient samples: {got} < {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("regression check failed: {0}")]
    Regression(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
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
