use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("load {load} lb is outside the drivable range [0, {limit}) of drone {model}")]
    Range { model: String, load: f64, limit: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("planning infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
