//! Object recognition over segmented point-cloud crops: a lightweight
//! embedding classifier decides which known instance a crop shows, and a
//! view database supplies the model clouds that the registration stages
//! align against.

pub mod classifier;
pub mod database;
pub mod embedding;
mod error;
pub mod selection;

pub use classifier::{predict, train_classifier, LogisticModel, TrainParams, TrainReport};
pub use database::{BuildParams, ModelDatabase, ObjectView};
pub use embedding::{
    extract_baseline_embedding, load_external_embedding, Embedding, EMBEDDING_DIM,
};
pub use error::{Error, Result};
pub use selection::{select_best_view, select_views, CoarseConfig};

pub use cloudpose_core::{FgrParams, RansacParams, RegistrationResult};
