use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HvError>;

#[derive(Debug, Error)]
pub enum HvError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("validation error in table `{table}`, row {row}: {message}")]
    Validation {
        table: String,
        row: String,
        message: String,
    },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HvError {
    pub(crate) fn validation(
        table: impl Into<String>,
        row: impl ToString,
        message: impl Into<String>,
    ) -> Self {
        HvError::Validation {
            table: table.into(),
            row: row.to_string(),
            message: message.into(),
        }
    }
}
