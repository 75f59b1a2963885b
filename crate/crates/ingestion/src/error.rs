use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image is {got_w}x{got_h}, intrinsics expect {want_w}x{want_h}")]
    DimensionMismatch {
        want_w: u32,
        want_h: u32,
        got_w: u32,
        got_h: u32,
    },

    /// The bounding box contains no valid-depth pixel.
    #[error("crop region holds no valid depth")]
    EmptyCrop,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("referenced file does not exist: {0}")]
    MissingFile(PathBuf),

    #[error(transparent)]
    Core(#[from] cloudpose_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("manifest error: {0}")]
    Manifest(#[from] serde_json::Error),
}
