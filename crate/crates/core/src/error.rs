use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate. Variants name the offending input where possible.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("column `{column}` not found in {path}")]
    MissingColumn { path: PathBuf, column: String },

    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },

    #[error("duplicate date {date} at row {row}")]
    DuplicateDate { row: usize, date: chrono::NaiveDate },

    #[error("dates not strictly increasing at index {index}")]
    UnorderedDates { index: usize },

    #[error("series `{a}` and `{b}` share no dates")]
    EmptyIntersection { a: String, b: String },

    #[error("insufficient data: need at least {required}, got {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero variance input")]
    ZeroVariance,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("no fit converged")]
    NoConvergedFit,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
