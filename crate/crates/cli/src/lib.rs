//! Pipeline orchestration: configuration, database building, classifier
//! training, frame processing, scoring, and synthetic test data.
//!
//! The binary in `main.rs` is a thin argument layer over this library;
//! integration tests drive the same functions directly.

pub mod config;
pub mod db_build;
mod error;
pub mod pipeline;
pub mod synth;
pub mod train;

pub use config::{
    load_config, CoarseMethod, ExecutionMode, FgrConfig, IcpConfig, PipelineConfig, RansacConfig,
    NORMAL_RADIUS_FACTOR,
};
pub use db_build::{build_database, BuildOutcome};
pub use error::{Error, Result};
pub use pipeline::{
    load_records, prepare_cloud, read_report, report_from_records, run_dataset, run_frame,
    write_report, ModePolicy, ReportMetadata, RunReport,
};
pub use synth::{
    add_noise, instance_label, object_cloud, random_axis, random_pose, random_surface_cloud,
    render_scene, view_pose, write_synthetic_dataset, PlacedObject, RenderedFrame, SynthParams,
};
pub use train::{collect_training_set, train_from_manifest};
