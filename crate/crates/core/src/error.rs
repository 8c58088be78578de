use std::path::PathBuf;

/// Errors produced by partition construction, index computation and IO.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input")]
    Empty,

    #[error("at least 2 objects are required, got {0}")]
    TooFewObjects(usize),

    #[error("negative cluster id {id} at position {index}")]
    NegativeLabel { index: usize, id: i64 },

    #[error("label {label} at position {index} is out of range for k = {k}")]
    LabelOutOfRange { index: usize, label: usize, k: usize },

    #[error("membership at row {row}, column {col} is {value}, outside [0, 1]")]
    MembershipOutOfRange { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, expected 1 within {tolerance:e}")]
    RowSum { row: usize, sum: f64, tolerance: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("size mismatch: left has {left} items, right has {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid pair ({i}, {j}) for n = {n}")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("value {value} outside [0, 1] in {what}")]
    OutOfUnitInterval { what: &'static str, value: f64 },

    #[error("index undefined: {0}")]
    Undefined(&'static str),

    #[error("exhaustive enumeration needs m <= {limit}, got m = {m}")]
    EnumerationTooLarge { m: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("cluster {0} has no members")]
    EmptyClass(usize),

    #[error("no numeric features")]
    NoNumericFeatures,

    #[error("{path}: line {line}, column {col}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that come from reading or parsing input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Io { .. } | Error::Csv(_) | Error::Json(_) | Error::NoNumericFeatures
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
