use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Engine(#[from] xplain_core::Error),

    /// Bad user input outside the engine: files, flags, request shapes.
    #[error("{0}")]
    Input(String),

    /// A request or file field with an unacceptable value.
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl AppError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        AppError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
