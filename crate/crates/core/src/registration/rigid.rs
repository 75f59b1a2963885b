//! Closed-form least-squares rigid pose from paired points.

use crate::linalg::{sym_eigen, sym_eigen3};
use crate::{Error, Mat3, Real, Result, RigidTransform, Vec3};

/// Ratio under which the source spread is treated as rank deficient.
const DEGENERATE_RATIO: f64 = 1e-9;

/// Least-squares rigid transform taking `source_points` onto
/// `target_points`, minimizing the summed squared residual.
///
/// Solved in quaternion form: the optimal rotation is the top eigenvector
/// of the 4x4 profile matrix built from the centered cross-covariance,
/// which cannot produce a reflection, so `det R = +1` holds by
/// construction.
pub fn estimate_rigid<R: Real>(
    source_points: &[Vec3<R>],
    target_points: &[Vec3<R>],
) -> Result<RigidTransform<R>> {
    if source_points.len() != target_points.len() {
        return Err(Error::InvalidParameter(format!(
            "{} source points paired with {} target points",
            source_points.len(),
            target_points.len()
        )));
    }
    let n = source_points.len();
    if n < 3 {
        return Err(Error::DegenerateConfiguration(format!(
            "need at least 3 point pairs, got {n}"
        )));
    }

    let inv_n = R::one() / R::from_usize(n).unwrap();
    let mut s_bar = Vec3::zeros();
    let mut t_bar = Vec3::zeros();
    for i in 0..n {
        s_bar += source_points[i];
        t_bar += target_points[i];
    }
    s_bar = s_bar * inv_n;
    t_bar = t_bar * inv_n;

    // Source scatter decides solvability: with the spread concentrated on
    // one axis the rotation about that axis is unobservable.
    let mut scatter = Mat3::zeros();
    let mut cross = Mat3::zeros();
    for i in 0..n {
        let s = source_points[i] - s_bar;
        let t = target_points[i] - t_bar;
        scatter = scatter + Mat3::outer(&s, &s);
        cross = cross + Mat3::outer(&s, &t);
    }
    let (spread, _) = sym_eigen3(&scatter);
    if spread[2] <= R::zero() || spread[1] <= spread[2] * R::c(DEGENERATE_RATIO) {
        return Err(Error::DegenerateConfiguration(
            "source points are collinear or coincident".into(),
        ));
    }

    let m = &cross.m;
    let (sxx, sxy, sxz) = (m[0][0], m[0][1], m[0][2]);
    let (syx, syy, syz) = (m[1][0], m[1][1], m[1][2]);
    let (szx, szy, szz) = (m[2][0], m[2][1], m[2][2]);
    let profile = [
        [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
        [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
        [szx - sxz, sxy + syx, syy - sxx - szz, syz + szy],
        [sxy - syx, szx + sxz, syz + szy, szz - sxx - syy],
    ];
    let (_, vecs) = sym_eigen::<R, 4>(&profile);
    let [w, x, y, z] = vecs[3];

    let two = R::c(2.0);
    let rotation = Mat3::from_rows(
        [
            R::one() - two * (y * y + z * z),
            two * (x * y - w * z),
            two * (x * z + w * y),
        ],
        [
            two * (x * y + w * z),
            R::one() - two * (x * x + z * z),
            two * (y * z - w * x),
        ],
        [
            two * (x * z - w * y),
            two * (y * z + w * x),
            R::one() - two * (x * x + y * y),
        ],
    );
    let translation = t_bar - rotation * s_bar;
    RigidTransform::new(rotation, translation)
}
