use cloudpose_core::{
    fgr_registration, ransac_registration, FeatureSet, FgrParams, PointCloud, RansacParams,
    RegistrationResult,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::database::{ModelDatabase, ObjectView};
use crate::error::{Error, Result};

/// Which coarse aligner to run, together with its parameters.
#[derive(Clone, Debug)]
pub enum CoarseConfig {
    Ransac(RansacParams<f64>),
    Fgr(FgrParams<f64>),
}

impl CoarseConfig {
    pub fn seed(&self) -> u64 {
        match self {
            CoarseConfig::Ransac(p) => p.seed,
            CoarseConfig::Fgr(p) => p.seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            CoarseConfig::Ransac(p) => p.seed = seed,
            CoarseConfig::Fgr(p) => p.seed = seed,
        }
        out
    }

    pub fn register(
        &self,
        source: &PointCloud<f64>,
        target: &PointCloud<f64>,
        source_features: &FeatureSet,
        target_features: &FeatureSet,
    ) -> cloudpose_core::Result<RegistrationResult<f64>> {
        match self {
            CoarseConfig::Ransac(p) => {
                ransac_registration(source, target, source_features, target_features, p)
            }
            CoarseConfig::Fgr(p) => {
                fgr_registration(source, target, source_features, target_features, p)
            }
        }
    }

    /// Configuration errors must surface before any per-view attempt, since
    /// per-view failures are treated as "this view cannot match".
    fn validate(&self) -> Result<()> {
        let threshold = match self {
            CoarseConfig::Ransac(p) => p.inlier_threshold,
            CoarseConfig::Fgr(p) => p.inlier_threshold,
        };
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidParameter(
                "inlier threshold must be positive".into(),
            ));
        }
        if let CoarseConfig::Fgr(p) = self {
            if !(p.tuple_ratio > 0.0 && p.tuple_ratio < 1.0) {
                return Err(Error::InvalidParameter(
                    "tuple ratio must lie in (0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Samples `count` stored views of an instance without replacement.
///
/// Views are taken in ascending view-id order before sampling, so the result
/// depends only on the database content and the seed. Fewer stored views
/// than requested returns all of them.
pub fn select_views<'d>(
    db: &'d ModelDatabase,
    label: &str,
    count: usize,
    seed: u64,
) -> Result<Vec<&'d ObjectView>> {
    let views = db.views(label)?;
    if count >= views.len() {
        return Ok(views.iter().collect());
    }
    let mut order: Vec<usize> = (0..views.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let j = rng.gen_range(i..order.len());
        order.swap(i, j);
    }
    Ok(order[..count].iter().map(|&i| &views[i]).collect())
}

/// Registers every candidate view against the scene crop and keeps the one
/// with the most inlier correspondences, requiring at least `min_inliers`.
///
/// Each view runs with its own seed, `base seed + view id`, so the outcome
/// does not depend on the order candidates are tried in. Ties fall to the
/// lower inlier RMSE, then the lower view id. A view whose registration
/// fails outright (too few or degenerate correspondences) simply cannot win.
pub fn select_best_view<'v>(
    scene_crop: &PointCloud<f64>,
    scene_features: &FeatureSet,
    views: &[&'v ObjectView],
    config: &CoarseConfig,
    min_inliers: usize,
) -> Result<(&'v ObjectView, RegistrationResult<f64>)> {
    config.validate()?;
    if scene_crop.is_empty() {
        return Err(Error::Core(cloudpose_core::Error::EmptyCloud));
    }
    if views.is_empty() {
        return Err(Error::InvalidParameter("no candidate views".into()));
    }

    let mut best: Option<(&ObjectView, RegistrationResult<f64>)> = None;
    for &view in views {
        let seeded = config.with_seed(config.seed().wrapping_add(u64::from(view.view_id())));
        let Ok(result) = seeded.register(view.cloud(), scene_crop, view.features(), scene_features)
        else {
            continue;
        };
        if result.inlier_count < min_inliers.max(1) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((held_view, held)) => {
                result.inlier_count > held.inlier_count
                    || (result.inlier_count == held.inlier_count
                        && (result.inlier_rmse < held.inlier_rmse
                            || (result.inlier_rmse == held.inlier_rmse
                                && view.view_id() < held_view.view_id())))
            }
        };
        if better {
            best = Some((view, result));
        }
    }
    best.ok_or(Error::NoMatch)
}
