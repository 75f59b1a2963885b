//! Global alignment from feature correspondences (RANSAC and graduated
//! non-convexity) plus the shared correspondence and result types.

mod fgr;
mod icp;
mod matching;
mod ransac;
mod rigid;

pub use fgr::{fgr_registration, FgrParams};
pub use icp::{icp_point_to_plane, registration_rmse, IcpParams, IcpResult, RmseReport};
pub use matching::match_features;
pub use ransac::{ransac_registration, RansacParams};
pub use rigid::estimate_rigid;

use crate::{Error, FeatureSet, PointCloud, Real, Result, RigidTransform, Vec3};

/// A matched descriptor pair. Indices address positions in the source and
/// target [`FeatureSet`]s, not cloud rows; the feature sets know which
/// cloud rows their descriptors came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correspondence {
    pub source_index: usize,
    pub target_index: usize,
    /// Euclidean distance between the two descriptors.
    pub feature_distance: f32,
}

/// Outcome of a coarse alignment.
///
/// `inlier_ratio` follows the overlap convention: inliers are counted
/// against the target's point count, capped at 1.
#[derive(Clone, Debug)]
pub struct RegistrationResult<R> {
    pub transform: RigidTransform<R>,
    pub inlier_count: usize,
    pub inlier_ratio: R,
    pub inlier_rmse: R,
    pub correspondence_set: Vec<Correspondence>,
}

/// Candidate correspondences resolved to cloud coordinates, so scoring and
/// pose estimation never touch the feature sets again.
struct CandidateSet<R> {
    correspondences: Vec<Correspondence>,
    source_points: Vec<Vec3<R>>,
    target_points: Vec<Vec3<R>>,
}

impl<R: Real> CandidateSet<R> {
    fn resolve(
        source: &PointCloud<R>,
        target: &PointCloud<R>,
        src_feats: &FeatureSet,
        tgt_feats: &FeatureSet,
        correspondences: Vec<Correspondence>,
    ) -> Result<Self> {
        let lookup = |cloud: &PointCloud<R>, feats: &FeatureSet, pos: usize| -> Result<Vec3<R>> {
            let row = feats.keypoint_indices()[pos] as usize;
            if row >= cloud.len() {
                return Err(Error::InvalidParameter(format!(
                    "feature keypoint {row} is outside its cloud of {} points",
                    cloud.len()
                )));
            }
            Ok(cloud.point(row))
        };
        let mut source_points = Vec::with_capacity(correspondences.len());
        let mut target_points = Vec::with_capacity(correspondences.len());
        for c in &correspondences {
            source_points.push(lookup(source, src_feats, c.source_index)?);
            target_points.push(lookup(target, tgt_feats, c.target_index)?);
        }
        Ok(CandidateSet {
            correspondences,
            source_points,
            target_points,
        })
    }

    fn len(&self) -> usize {
        self.correspondences.len()
    }

    /// Indices of candidates the transform moves to within `threshold` of
    /// their target (strictly), plus the RMSE over those residuals.
    fn score(&self, t: &RigidTransform<R>, threshold: R) -> (Vec<usize>, R) {
        let mut inliers = Vec::new();
        let mut sum_sq = R::zero();
        for i in 0..self.len() {
            let d2 = (t.apply(&self.source_points[i]) - self.target_points[i]).norm_squared();
            if d2.sqrt() < threshold {
                inliers.push(i);
                sum_sq += d2;
            }
        }
        let rmse = if inliers.is_empty() {
            R::zero()
        } else {
            (sum_sq / R::from_usize(inliers.len()).unwrap()).sqrt()
        };
        (inliers, rmse)
    }

    /// Package a scored transform as the final result.
    fn result(
        &self,
        target: &PointCloud<R>,
        transform: RigidTransform<R>,
        inliers: Vec<usize>,
        rmse: R,
    ) -> RegistrationResult<R> {
        let ratio = if target.is_empty() {
            R::zero()
        } else {
            let raw = R::from_usize(inliers.len()).unwrap() / R::from_usize(target.len()).unwrap();
            raw.min(R::one())
        };
        RegistrationResult {
            transform,
            inlier_count: inliers.len(),
            inlier_ratio: ratio,
            inlier_rmse: rmse,
            correspondence_set: inliers.iter().map(|&i| self.correspondences[i]).collect(),
        }
    }
}

fn check_threshold<R: Real>(threshold: R) -> Result<()> {
    if !threshold.is_finite() || threshold <= R::zero() {
        return Err(Error::InvalidParameter(
            "inlier threshold must be positive and finite".into(),
        ));
    }
    Ok(())
}
