use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::DetectionRecord;

/// Lowest correspondence threshold the curve sweeps. Three matches are
/// the minimum that can pin down a rigid transform, so weaker
/// detections never count.
pub const MIN_CORRESPONDENCE_THRESHOLD: u32 = 3;

/// Stated convention for the curve and its area, embedded in report
/// metadata so numbers stay comparable across runs.
pub const PRC_CONVENTION: &str = "thresholds tau = 3..=max correspondence count; keep detections \
     with count >= tau; precision = TP/(TP+FP), recall = TP/GT; AUC by trapezoid over points \
     sorted by (recall asc, precision desc) with anchor (recall 0, precision of max tau)";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: u32,
    pub precision: f64,
    pub recall: f64,
}

/// Precision-recall curve over the minimum-correspondence threshold,
/// with its trapezoid area. Thresholds are strictly increasing from 3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub auc: f64,
}

impl PrCurve {
    /// CSV form of the curve for plotting, header included.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,precision,recall\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.threshold, p.precision, p.recall));
        }
        out
    }
}

/// Sweeps the correspondence threshold from 3 to the highest observed
/// count, scoring precision and recall at each step. `gt_counts` holds
/// the number of annotated objects per frame; their sum is the recall
/// denominator.
pub fn prc_auc(records: &[DetectionRecord], gt_counts: &[usize]) -> Result<PrCurve> {
    let total_gt: usize = gt_counts.iter().sum();
    if total_gt == 0 {
        return Err(Error::UndefinedRecall);
    }
    if records.iter().filter(|r| r.is_true_positive).count() > total_gt {
        return Err(Error::InvalidRecord(
            "more true positives than ground-truth objects".into(),
        ));
    }

    let max_count = records
        .iter()
        .map(|r| r.correspondence_count)
        .max()
        .unwrap_or(0);
    let mut points = Vec::new();
    for tau in MIN_CORRESPONDENCE_THRESHOLD..=max_count {
        let (mut tp, mut fp) = (0usize, 0usize);
        for r in records {
            if r.correspondence_count >= tau {
                if r.is_true_positive {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        // tau never exceeds an observed count, so at least one
        // detection survives every emitted threshold.
        points.push(PrPoint {
            threshold: tau,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / total_gt as f64,
        });
    }
    let auc = trapezoid_area(&points);
    Ok(PrCurve { points, auc })
}

/// Area under the curve: sort by recall (precision descending inside a
/// tie), anchor at (0, precision of the strictest threshold), sum
/// trapezoids.
fn trapezoid_area(points: &[PrPoint]) -> f64 {
    let Some(strictest) = points.last() else {
        return 0.0;
    };
    let mut ordered: Vec<(f64, f64)> = Vec::with_capacity(points.len() + 1);
    ordered.push((0.0, strictest.precision));
    ordered.extend(points.iter().map(|p| (p.recall, p.precision)));
    ordered.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(b.1.partial_cmp(&a.1).unwrap())
    });
    ordered
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5)
        .sum()
}
