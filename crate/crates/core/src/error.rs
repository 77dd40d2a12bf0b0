use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("row {row}: expected {expected} fields, found {found}")]
    FieldCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: cannot parse {value:?} as a finite number")]
    ParseNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column}: missing cell")]
    MissingCell { row: usize, column: String },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {column:?} must be {expected}")]
    ColumnKind {
        column: String,
        expected: &'static str,
    },
    #[error("table has no target column")]
    NoTarget,

    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("column {0:?} is constant")]
    ConstantColumn(String),
    #[error("value {value} at index {index} is outside the domain of {transform}")]
    Domain {
        transform: &'static str,
        index: usize,
        value: f64,
    },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("target has a single class")]
    SingleClass,
    #[error("empty feature set")]
    NoFeatures,
    #[error("class {class:?} has {count} members, fewer than {folds} folds")]
    ClassTooSmall {
        class: String,
        count: usize,
        folds: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Whether the error stems from user input (files, schemas, data,
    /// configuration) rather than from the environment while writing results.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Write { .. } | Error::Json(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
