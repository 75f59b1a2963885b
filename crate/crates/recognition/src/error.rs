use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Training data must contain at least two distinct labels.
    #[error("training data contains a single class")]
    SingleClass,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("image crop is empty")]
    EmptyImage,

    #[error("unknown instance '{0}'")]
    UnknownInstance(String),

    /// No candidate view produced enough consistent correspondences.
    #[error("no candidate view reached the correspondence floor")]
    NoMatch,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("model database is incompatible: {0}")]
    Incompatible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Core(#[from] cloudpose_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("manifest error: {0}")]
    Manifest(#[from] serde_json::Error),
}
