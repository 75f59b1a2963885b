use serde::{Deserialize, Serialize};

use crate::record::DetectionRecord;

/// Mean per-stage cost and throughput at the three execution depths:
/// classification alone, plus coarse registration, plus ICP. A column
/// stays `None` when no record timed the stages it needs, or when the
/// stages cost nothing measurable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub records: usize,
    pub mean_classify_s: Option<f64>,
    pub mean_coarse_s: Option<f64>,
    pub mean_icp_s: Option<f64>,
    pub fps_classify: Option<f64>,
    pub fps_classify_coarse: Option<f64>,
    pub fps_full: Option<f64>,
}

/// Averages stage timings over the records where each stage actually
/// ran, then reports throughput as the reciprocal of the summed means.
pub fn aggregate_timings(records: &[DetectionRecord]) -> TimingReport {
    let mean = |pick: fn(&DetectionRecord) -> Option<f64>| -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for r in records {
            if let Some(t) = pick(r) {
                sum += t;
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    };
    let classify = mean(|r| r.stage_timings.classify);
    let coarse = mean(|r| r.stage_timings.coarse);
    let icp = mean(|r| r.stage_timings.icp);

    // A stage pipeline with zero measured cost has no finite rate.
    let fps = |total: Option<f64>| total.filter(|t| *t > 0.0).map(|t| 1.0 / t);
    let through_coarse = classify.zip(coarse).map(|(a, b)| a + b);
    let through_icp = through_coarse.zip(icp).map(|(a, b)| a + b);

    TimingReport {
        records: records.len(),
        mean_classify_s: classify,
        mean_coarse_s: coarse,
        mean_icp_s: icp,
        fps_classify: fps(classify),
        fps_classify_coarse: fps(through_coarse),
        fps_full: fps(through_icp),
    }
}
