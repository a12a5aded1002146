use std::path::PathBuf;

use thiserror::Error;

/// Every failure the pipeline can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {message}")]
    Row { row: u64, message: String },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("spec error: {0}")]
    Spec(String),

    #[error("incompatible features: model fingerprint {expected}, matrix fingerprint {found}")]
    Compatibility { expected: String, found: String },

    #[error("unsupported model format_version {found} (this build reads version {supported})")]
    Migration { found: u64, supported: u64 },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("asset error: {0}")]
    Asset(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
