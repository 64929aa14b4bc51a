use std::path::PathBuf;

/// Errors produced while validating, scoring, evaluating or persisting parsing outputs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("score missing: {0}")]
    ScoreMissing(String),

    // the io error is folded into the message rather than exposed as a source,
    // so chained reports don't repeat it
    #[error("{path}: {cause}")]
    Io {
        path: PathBuf,
        cause: std::io::Error,
    },

    #[error("{path}: format error: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{path}: field `{field}`: {msg}")]
    Schema {
        path: PathBuf,
        field: String,
        msg: String,
    },

    #[error("image set mismatch: {0}")]
    ImageSetMismatch(String),

    #[error("generation error: {0}")]
    Generation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, cause: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn schema(
        path: impl Into<PathBuf>,
        field: impl Into<String>,
        msg: impl Into<String>,
    ) -> Self {
        Error::Schema {
            path: path.into(),
            field: field.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
