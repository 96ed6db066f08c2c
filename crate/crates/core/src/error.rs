use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("label column `{0}` not found")]
    MissingColumn(String),
    #[error("non-numeric value `{value}` in column `{column}` at row {row}")]
    NonNumeric {
        column: String,
        row: usize,
        value: String,
    },
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("binary only: found {0} distinct labels")]
    NotBinary(usize),
    #[error("need both classes present, found {0} distinct label(s)")]
    SingleClass(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("class {class} has {count} samples, need at least {needed}")]
    ClassTooSmall {
        class: u8,
        count: usize,
        needed: usize,
    },
    #[error("empty input")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("leaf index {0} is not a leaf of this tree")]
    InvalidLeaf(usize),
    #[error("total vote weight is zero")]
    ZeroWeight,
    #[error("no out-of-bag estimate available")]
    NoOobSamples,
    #[error("need at least {needed} nonzero differences, got {got}")]
    TooFewDifferences { needed: usize, got: usize },
    #[error("input is constant")]
    ConstantInput,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
