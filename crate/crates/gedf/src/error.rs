use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type. Every failure carries a named cause; the CLI maps
/// these to nonzero exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: String,
        expected: String,
        actual: String,
    },

    #[error("input too short: {len} samples, STFT window needs {window}")]
    InputTooShort { len: usize, window: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("adaptive pooling cannot upsample: target {target} frames > input {input} frames")]
    Pooling { target: usize, input: usize },

    #[error("branch frame counts differ: type branch {type_frames}, direction branch {direction_frames}")]
    Alignment {
        type_frames: usize,
        direction_frames: usize,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("ranking protocol violation: {0}")]
    Protocol(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what} at {path}:{line}: {message}")]
    Parse {
        what: String,
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn shape(
        context: impl Into<String>,
        expected: impl Into<String>,
        actual: impl Into<String>,
    ) -> Self {
        Error::Shape {
            context: context.into(),
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
