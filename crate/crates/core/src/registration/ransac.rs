//! RANSAC over feature correspondences.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_threshold, estimate_rigid, match_features, CandidateSet, RegistrationResult};
use crate::{Error, FeatureSet, PointCloud, Real, Result, RigidTransform};

#[derive(Clone, Debug)]
pub struct RansacParams<R> {
    pub max_iterations: usize,
    /// Consecutive fully-validated hypotheses that fail to improve on the
    /// incumbent before the search stops early.
    pub validation_steps: usize,
    pub inlier_threshold: R,
    pub mutual_matching: bool,
    pub seed: u64,
}

impl<R: Real> Default for RansacParams<R> {
    fn default() -> Self {
        RansacParams {
            max_iterations: 4_000_000,
            validation_steps: 500,
            inlier_threshold: R::c(0.01),
            mutual_matching: false,
            seed: 0,
        }
    }
}

/// Pairwise edge-length agreement required of a 3-sample before it is worth
/// a pose estimate.
const EDGE_RATIO: f64 = 0.9;

struct Best<R> {
    transform: RigidTransform<R>,
    inlier_count: usize,
    rmse: R,
}

pub fn ransac_registration<R: Real>(
    source: &PointCloud<R>,
    target: &PointCloud<R>,
    src_feats: &FeatureSet,
    tgt_feats: &FeatureSet,
    params: &RansacParams<R>,
) -> Result<RegistrationResult<R>> {
    check_threshold(params.inlier_threshold)?;
    let correspondences = match_features(src_feats, tgt_feats, params.mutual_matching)?;
    if correspondences.len() < 3 {
        return Err(Error::TooFewCorrespondences(correspondences.len()));
    }
    let candidates = CandidateSet::resolve(source, target, src_feats, tgt_feats, correspondences)?;

    let n = candidates.len();
    let lo = R::c(EDGE_RATIO);
    let hi = R::one() / lo;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<Best<R>> = None;
    let mut stale_validations = 0usize;

    for _ in 0..params.max_iterations {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n);
        while b == a {
            b = rng.gen_range(0..n);
        }
        let mut c = rng.gen_range(0..n);
        while c == a || c == b {
            c = rng.gen_range(0..n);
        }

        // Edge-length pruning: a rigid motion preserves pairwise distances,
        // so wildly mismatched triangles cannot produce a useful pose.
        let sample = [a, b, c];
        let mut plausible = true;
        for k in 0..3 {
            let (i, j) = (sample[k], sample[(k + 1) % 3]);
            let ds = candidates.source_points[i].distance(&candidates.source_points[j]);
            let dt = candidates.target_points[i].distance(&candidates.target_points[j]);
            let ratio = ds / dt;
            if !(ratio >= lo && ratio <= hi) {
                plausible = false;
                break;
            }
        }
        if !plausible {
            continue;
        }

        let src = [
            candidates.source_points[a],
            candidates.source_points[b],
            candidates.source_points[c],
        ];
        let tgt = [
            candidates.target_points[a],
            candidates.target_points[b],
            candidates.target_points[c],
        ];
        let Ok(hypothesis) = estimate_rigid(&src, &tgt) else {
            continue;
        };

        let (inliers, rmse) = candidates.score(&hypothesis, params.inlier_threshold);
        let improved = match &best {
            None => true,
            Some(cur) => {
                inliers.len() > cur.inlier_count
                    || (inliers.len() == cur.inlier_count && rmse < cur.rmse)
            }
        };
        if improved {
            best = Some(Best {
                transform: hypothesis,
                inlier_count: inliers.len(),
                rmse,
            });
            stale_validations = 0;
        } else {
            stale_validations += 1;
            if stale_validations >= params.validation_steps {
                break;
            }
        }
    }

    let Some(best) = best else {
        // Every sample was pruned or degenerate; report an empty alignment.
        return Ok(candidates.result(target, RigidTransform::identity(), Vec::new(), R::zero()));
    };

    // Polish on the full consensus set, then rescore under the final pose so
    // the reported set and rmse describe the transform actually returned.
    let (consensus, _) = candidates.score(&best.transform, params.inlier_threshold);
    let mut final_t = best.transform;
    if consensus.len() >= 3 {
        let src: Vec<_> = consensus.iter().map(|&i| candidates.source_points[i]).collect();
        let tgt: Vec<_> = consensus.iter().map(|&i| candidates.target_points[i]).collect();
        if let Ok(polished) = estimate_rigid(&src, &tgt) {
            final_t = polished;
        }
    }
    let (inliers, rmse) = candidates.score(&final_t, params.inlier_threshold);
    Ok(candidates.result(target, final_t, inliers, rmse))
}
