//! Detection and pose scoring for the recognition pipeline.
//!
//! A detection is judged by comparing two axis-aligned boxes in camera
//! coordinates: the back-projection of the annotated 2D region and the
//! box of the aligned model cloud. Overlap is measured as IoU and as
//! MIR (the fraction of the estimate inside the ground truth, which
//! rescues small objects annotated with generous boxes). Sweeping the
//! minimum-correspondence threshold yields a precision-recall curve;
//! stage timings aggregate into throughput columns.

mod error;
mod gt;
mod metrics;
mod prc;
mod record;
mod timing;

pub use error::{Error, Result};
pub use gt::project_gt_box;
pub use metrics::{is_true_positive, iou_3d, mir, IOU_TP_THRESHOLD, MIR_TP_THRESHOLD};
pub use prc::{prc_auc, PrCurve, PrPoint, MIN_CORRESPONDENCE_THRESHOLD, PRC_CONVENTION};
pub use record::{DetectionRecord, StageTimings};
pub use timing::{aggregate_timings, TimingReport};
