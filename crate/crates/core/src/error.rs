use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error)]
pub enum SicaError {
    #[error("negative value {value} at row {row}, column {col}")]
    NegativeValue { row: usize, col: usize, value: f64 },

    #[error("non-numeric cell {text:?} at row {row}, column {col}")]
    NonNumeric {
        row: usize,
        col: usize,
        text: String,
    },

    #[error("ragged input: line {line} has {found} fields, expected {expected}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("table is empty after removing all-zero rows and columns")]
    EmptyTable,

    #[error("grand total is zero")]
    ZeroTotal,

    #[error("row {row} has zero sum")]
    ZeroRowSum { row: usize },

    #[error("power exponent must be positive, got {0}")]
    InvalidAlpha(f64),

    #[error("LRA requires strictly positive data: cell ({row}, {col}) is zero")]
    ZeroCell { row: usize, col: usize },

    #[error("table marginals are not uniform (max deviation {deviation:.3e})")]
    NotBistochastic { deviation: f64 },

    #[error("multiplicative centering undefined: grand weighted mean is zero")]
    ZeroGrandMean,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("dimension {requested} out of range (decomposition has {available})")]
    DimensionOutOfRange { requested: usize, available: usize },

    #[error("exhaustive search over 2^{side} sign vectors is too large (limit 2^{limit})")]
    SideTooLarge { side: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SicaError>;
