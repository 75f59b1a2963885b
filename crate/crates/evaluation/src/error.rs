use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("estimated box has zero volume")]
    DegenerateBox,

    #[error("no valid depth inside the ground-truth box")]
    EmptyProjection,

    #[error("recall is undefined without ground-truth objects")]
    UndefinedRecall,

    #[error("invalid detection record: {0}")]
    InvalidRecord(String),

    #[error(transparent)]
    Core(#[from] cloudpose_core::Error),

    #[error(transparent)]
    Ingest(#[from] cloudpose_ingestion::Error),
}
