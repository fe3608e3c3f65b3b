use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Shape(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Core(#[from] bsa_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("weights file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
