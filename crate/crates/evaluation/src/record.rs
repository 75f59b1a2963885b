use cloudpose_core::Aabb;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wall-clock seconds per pipeline stage. A stage that did not run for
/// this detection stays `None`; a recorded time must be finite and
/// non-negative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub classify: Option<f64>,
    pub coarse: Option<f64>,
    pub icp: Option<f64>,
}

impl StageTimings {
    pub fn stages(&self) -> [(&'static str, Option<f64>); 3] {
        [
            ("classify", self.classify),
            ("coarse", self.coarse),
            ("icp", self.icp),
        ]
    }
}

/// One scored detection: an annotated object in a frame together with
/// what the pipeline made of it. Stages that were skipped or failed
/// leave their fields unset; `error` carries the failure text so a bad
/// annotation never aborts a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame_id: String,
    pub instance_label: String,
    pub predicted_label: Option<String>,
    pub correspondence_count: u32,
    pub est_box: Option<Aabb<f64>>,
    pub gt_box: Option<Aabb<f64>>,
    pub iou: Option<f64>,
    pub mir: Option<f64>,
    pub stage_timings: StageTimings,
    pub is_true_positive: bool,
    pub error: Option<String>,
}

impl DetectionRecord {
    /// Checks the value ranges a scorer may rely on: overlap fractions
    /// in [0, 1] and timings finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("iou", self.iou), ("mir", self.mir)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidRecord(format!(
                        "{name} {v} outside [0, 1] in frame {}",
                        self.frame_id
                    )));
                }
            }
        }
        for (name, t) in self.stage_timings.stages() {
            if let Some(t) = t {
                if !t.is_finite() || t < 0.0 {
                    return Err(Error::InvalidRecord(format!(
                        "{name} timing {t} in frame {}",
                        self.frame_id
                    )));
                }
            }
        }
        Ok(())
    }
}
