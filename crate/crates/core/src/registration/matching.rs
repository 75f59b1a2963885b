//! Descriptor matching between two feature sets.

use super::Correspondence;
use crate::fpfh::{FpfhDescriptor, FPFH_DIM};
use crate::{Error, FeatureSet, Result};

/// Squared distance with an early bail-out once the partial sum can no
/// longer beat `cap`. Accumulation order matches
/// [`FpfhDescriptor::distance_squared`], so any value actually returned is
/// bit-identical to the full computation.
fn distance_squared_capped(a: &FpfhDescriptor, b: &FpfhDescriptor, cap: f32) -> Option<f32> {
    let mut acc = 0.0f32;
    for k in 0..FPFH_DIM {
        let d = a.bins[k] - b.bins[k];
        acc += d * d;
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

/// For each row of `from`, the index of its nearest row in `to` plus the
/// squared distance. Ties go to the lower index.
fn nearest_map(from: &[FpfhDescriptor], to: &[FpfhDescriptor]) -> Vec<(usize, f32)> {
    from.iter()
        .map(|d| {
            let mut best = f32::INFINITY;
            let mut best_j = 0usize;
            for (j, e) in to.iter().enumerate() {
                if let Some(d2) = distance_squared_capped(d, e, best) {
                    if d2 < best {
                        best = d2;
                        best_j = j;
                    }
                }
            }
            (best_j, best)
        })
        .collect()
}

/// Nearest-neighbor correspondences from source descriptors to target
/// descriptors; with `mutual` set, keep only pairs that are each other's
/// nearest neighbor.
pub fn match_features(
    source: &FeatureSet,
    target: &FeatureSet,
    mutual: bool,
) -> Result<Vec<Correspondence>> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    let forward = nearest_map(source.descriptors(), target.descriptors());
    let backward = if mutual {
        Some(nearest_map(target.descriptors(), source.descriptors()))
    } else {
        None
    };
    Ok(forward
        .iter()
        .enumerate()
        .filter(|(i, (j, _))| match &backward {
            Some(back) => back[*j].0 == *i,
            None => true,
        })
        .map(|(i, &(j, d2))| Correspondence {
            source_index: i,
            target_index: j,
            feature_distance: d2.sqrt(),
        })
        .collect())
}
