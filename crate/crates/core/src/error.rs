use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("spatial index is empty")]
    EmptyIndex,

    #[error("feature set is empty")]
    EmptyFeatureSet,

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("need at least 3 correspondences, got {0}")]
    TooFewCorrespondences(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
