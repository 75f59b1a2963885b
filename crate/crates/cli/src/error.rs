use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("instance '{0}' has no usable views")]
    EmptyInstance(String),

    #[error("no instance directories under {0}")]
    NoInstances(std::path::PathBuf),

    #[error(transparent)]
    Core(#[from] cloudpose_core::Error),

    #[error(transparent)]
    Ingest(#[from] cloudpose_ingestion::Error),

    #[error(transparent)]
    Recognition(#[from] cloudpose_recognition::Error),

    #[error(transparent)]
    Evaluation(#[from] cloudpose_evaluation::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
