use cloudpose_core::Aabb;
use cloudpose_ingestion::{crop_by_bbox, BBox2d, CameraIntrinsics, DepthMap};

use crate::error::{Error, Result};

/// Axis-aligned box of the annotated region: every valid-depth pixel
/// inside the 2D ground-truth bbox, back-projected through the camera.
/// This is the reference volume the estimated model box is scored
/// against.
pub fn project_gt_box(
    bbox: &BBox2d,
    depth: &DepthMap,
    k: &CameraIntrinsics,
) -> Result<Aabb<f64>> {
    let cloud = match crop_by_bbox(depth, None, k, bbox) {
        Ok(cloud) => cloud,
        Err(cloudpose_ingestion::Error::EmptyCrop) => return Err(Error::EmptyProjection),
        Err(e) => return Err(Error::Ingest(e)),
    };
    Ok(cloud.bounding_box()?)
}
