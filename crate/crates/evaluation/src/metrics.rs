use cloudpose_core::Aabb;

use crate::error::{Error, Result};

/// A detection localizes well enough when its IoU reaches this value.
pub const IOU_TP_THRESHOLD: f64 = 0.25;

/// Fallback criterion: the estimate sits almost entirely inside the
/// ground-truth region. Rescues small objects inside a generous box.
pub const MIR_TP_THRESHOLD: f64 = 0.90;

/// Intersection volume over union volume of two axis-aligned boxes.
/// Disjoint boxes score 0; two zero-volume boxes share nothing, so the
/// ratio is defined as 0 rather than 0/0.
pub fn iou_3d(gt: &Aabb<f64>, est: &Aabb<f64>) -> f64 {
    let inter = gt.intersection(est).map_or(0.0, |b| b.volume());
    let union = gt.volume() + est.volume() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Intersection volume over estimated-box volume: the fraction of the
/// estimate contained in the ground-truth region. Asymmetric by design.
pub fn mir(gt: &Aabb<f64>, est: &Aabb<f64>) -> Result<f64> {
    let v = est.volume();
    if v <= 0.0 {
        return Err(Error::DegenerateBox);
    }
    let inter = gt.intersection(est).map_or(0.0, |b| b.volume());
    Ok(inter / v)
}

/// Localization succeeds when either overlap criterion holds.
pub fn is_true_positive(iou: f64, mir: f64) -> bool {
    iou >= IOU_TP_THRESHOLD || mir >= MIR_TP_THRESHOLD
}
