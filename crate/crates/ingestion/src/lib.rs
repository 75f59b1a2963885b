//! Depth-image ingestion: turns sensor frames into point clouds.
//!
//! A frame is an RGB image plus a 16-bit depth image sharing one set of
//! pinhole intrinsics. This crate back-projects depth pixels into metric
//! 3D points, crops frames by 2D boxes, and reads dataset manifests that
//! list frames with their ground-truth annotations.

mod camera;
mod depth;
mod error;
mod manifest;
mod project;

pub use camera::CameraIntrinsics;
pub use depth::{load_depth_png, load_rgb_png, save_depth_png, DepthMap};
pub use error::{Error, Result};
pub use manifest::{load_dataset_manifest, Annotation, DatasetManifest, FrameManifest};
pub use project::{crop_by_bbox, crop_rgb, depth_to_cloud, BBox2d};
