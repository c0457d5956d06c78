use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum SomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("map needs at least 2 neurons, has {0}")]
    TooFewNeurons(usize),

    #[error("presentation index {t} out of range for {presentations} presentations")]
    PresentationOutOfRange { t: u64, presentations: u64 },

    #[error("row {row}, feature {feature}: value {value} is outside [0, 1]; train on normalized data")]
    NotNormalized { row: usize, feature: usize, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("csv row {row}, column {column}: {message}")]
    CsvCell {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("csv row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error("malformed json at line {line}, column {column}: {message}")]
    MalformedJson {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("unsupported format_version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, SomError>;

impl SomError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SomError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        SomError::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(SomError::DimensionMismatch { expected, found })
    }
}
