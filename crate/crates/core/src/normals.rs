//! Surface normal estimation by neighborhood PCA.

use crate::linalg::sym_eigen3;
use crate::{Error, KdTree, Mat3, PointCloud, Real, Result, Vec3};

/// Rank-deficiency cutoff: the neighborhood is degenerate (a line or a
/// point, no well-defined normal) when the middle eigenvalue is this
/// small relative to the largest.
const DEGENERATE_RATIO: f64 = 1e-9;

/// Estimate a normal per point from the points within `radius`
/// (the point itself included), oriented toward `viewpoint`.
///
/// Points whose neighborhood has fewer than 3 members, or whose PCA is
/// rank-deficient, get the zero-vector invalid flag. Returns a copy of
/// the cloud with normals attached.
pub fn estimate_normals<R: Real>(
    cloud: &PointCloud<R>,
    radius: R,
    viewpoint: Vec3<R>,
) -> Result<PointCloud<R>> {
    if cloud.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: cloud.len(),
        });
    }
    if !(radius.is_finite() && radius > R::zero()) {
        return Err(Error::InvalidParameter(
            "normal estimation radius must be finite and positive".into(),
        ));
    }

    let tree = KdTree::from_points(cloud.points())?;
    let mut normals = Vec::with_capacity(cloud.len());

    for p in cloud.points() {
        let hits = tree.within_radius(&p.to_array(), radius)?;
        if hits.len() < 3 {
            normals.push(Vec3::zeros());
            continue;
        }

        let mut mean = Vec3::zeros();
        for (id, _) in &hits {
            mean += cloud.point(*id);
        }
        mean = mean / R::from_usize(hits.len()).unwrap();

        let mut cov = Mat3::zeros();
        for (id, _) in &hits {
            let d = cloud.point(*id) - mean;
            for i in 0..3 {
                for j in 0..3 {
                    cov.m[i][j] += d[i] * d[j];
                }
            }
        }

        let (vals, vecs) = sym_eigen3(&cov);
        // vals ascending; vals[1] ~ 0 means collinear or coincident points.
        if vals[2] <= R::zero() || vals[1] <= vals[2] * R::c(DEGENERATE_RATIO) {
            normals.push(Vec3::zeros());
            continue;
        }

        let mut n = match vecs[0].normalized() {
            Some(v) => v,
            None => {
                normals.push(Vec3::zeros());
                continue;
            }
        };
        if n.dot(&(viewpoint - *p)) < R::zero() {
            n = -n;
        }
        normals.push(n);
    }

    let mut out = cloud.clone();
    out.set_normals(normals)?;
    Ok(out)
}
