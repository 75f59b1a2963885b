//! Rigid motions in 3-D: a rotation matrix plus a translation.

use crate::linalg::polar_orthonormalize;
use crate::{Error, Mat3, Real, Result, Vec3};

/// Tolerance on `R^T R = I` and `det R = 1` for stored rotations.
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RigidTransform<R> {
    pub rotation: Mat3<R>,
    pub translation: Vec3<R>,
}

impl<R: Real> Default for RigidTransform<R> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<R: Real> RigidTransform<R> {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Build from parts, rejecting rotations that are not orthonormal with
    /// determinant +1 within [`ROTATION_TOL`].
    pub fn new(rotation: Mat3<R>, translation: Vec3<R>) -> Result<Self> {
        let t = RigidTransform {
            rotation,
            translation,
        };
        if !t.rotation_is_valid() {
            return Err(Error::InvalidParameter(
                "rotation is not orthonormal with determinant +1".into(),
            ));
        }
        Ok(t)
    }

    /// Build from parts without the orthonormality check. For solver
    /// internals that re-orthonormalize themselves.
    pub fn from_parts_unchecked(rotation: Mat3<R>, translation: Vec3<R>) -> Self {
        RigidTransform {
            rotation,
            translation,
        }
    }

    pub fn rotation_is_valid(&self) -> bool {
        let tol = R::c(ROTATION_TOL);
        let gram = self.rotation.transpose() * self.rotation;
        let id = Mat3::identity();
        for i in 0..3 {
            for j in 0..3 {
                if (gram.m[i][j] - id.m[i][j]).abs() > tol {
                    return false;
                }
            }
        }
        (self.rotation.det() - R::one()).abs() <= tol && self.translation.is_finite()
    }

    /// Rotation about the z axis, for tests and fixtures.
    pub fn rotation_z(angle: R) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let o = R::zero();
        let l = R::one();
        RigidTransform {
            rotation: Mat3::from_rows([c, -s, o], [s, c, o], [o, o, l]),
            translation: Vec3::zeros(),
        }
    }

    /// Rodrigues rotation about an arbitrary axis.
    pub fn rotation_axis_angle(axis: Vec3<R>, angle: R) -> Self {
        let w = axis.normalized().unwrap_or(Vec3::new(R::one(), R::zero(), R::zero()));
        let k = Mat3::skew(&w);
        let rot = Mat3::identity() + k * angle.sin() + (k * k) * (R::one() - angle.cos());
        RigidTransform {
            rotation: polar_orthonormalize(&rot),
            translation: Vec3::zeros(),
        }
    }

    pub fn with_translation(mut self, t: Vec3<R>) -> Self {
        self.translation = t;
        self
    }

    pub fn apply(&self, p: &Vec3<R>) -> Vec3<R> {
        self.rotation * *p + self.translation
    }

    pub fn rotate(&self, v: &Vec3<R>) -> Vec3<R> {
        self.rotation * *v
    }

    /// `self` after `rhs`: `(self * rhs)(p) = self(rhs(p))`.
    pub fn compose(&self, rhs: &Self) -> Self {
        RigidTransform {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Exponential of a twist `(omega, v)`: Rodrigues for the rotation part,
    /// plain translation for the linear part. Good enough for the small
    /// steps the iterative solvers take.
    pub fn from_twist(omega: Vec3<R>, v: Vec3<R>) -> Self {
        let theta = omega.norm();
        let rotation = if theta > R::epsilon() {
            let k = Mat3::skew(&(omega / theta));
            Mat3::identity() + k * theta.sin() + (k * k) * (R::one() - theta.cos())
        } else {
            // Second-order series; below eps the quadratic term is noise.
            Mat3::identity() + Mat3::skew(&omega)
        };
        RigidTransform {
            rotation: polar_orthonormalize(&rotation),
            translation: v,
        }
    }

    /// Geodesic angle of the relative rotation to `other`, in radians.
    pub fn rotation_angle_to(&self, other: &Self) -> R {
        let rel = self.rotation.transpose() * other.rotation;
        let c = (rel.trace() - R::one()) * R::c(0.5);
        c.min(R::one()).max(-R::one()).acos()
    }

    /// Project the rotation part back onto the rotation group.
    pub fn orthonormalized(&self) -> Self {
        RigidTransform {
            rotation: polar_orthonormalize(&self.rotation),
            translation: self.translation,
        }
    }

    pub fn cast<S: Real>(&self) -> RigidTransform<S> {
        RigidTransform {
            rotation: self.rotation.cast(),
            translation: self.translation.cast(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_bitwise_noop() {
        let t = RigidTransform::<f64>::identity();
        let p = Vec3::new(0.123456789, -4.2, 1e-7);
        assert_eq!(t.apply(&p), p);
    }

    #[test]
    fn quarter_turn_about_z() {
        let t = RigidTransform::rotation_z(std::f64::consts::FRAC_PI_2);
        let p = t.apply(&Vec3::new(1.0, 0.0, 0.0));
        assert!((p - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let t = RigidTransform::rotation_axis_angle(Vec3::new(1.0, 2.0, -0.5), 0.8)
            .with_translation(Vec3::new(0.3, -0.1, 2.0));
        let round = t.compose(&t.inverse());
        let p = Vec3::new(0.5, 0.7, -1.3);
        assert!((round.apply(&p) - p).norm() < 1e-12);
    }

    #[test]
    fn new_rejects_scaled_rotation() {
        let bad = Mat3::from_rows([1.1, 0.0, 0.0], [0.0, 1.1, 0.0], [0.0, 0.0, 1.1]);
        assert!(matches!(
            RigidTransform::new(bad, Vec3::zeros()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn new_rejects_reflection() {
        let refl = Mat3::from_rows([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]);
        assert!(RigidTransform::new(refl, Vec3::zeros()).is_err());
    }

    #[test]
    fn twist_matches_axis_angle() {
        let axis = Vec3::new(0.0, 0.0, 1.0);
        let a = RigidTransform::from_twist(axis * 0.3, Vec3::zeros());
        let b = RigidTransform::rotation_z(0.3);
        assert!(a.rotation_angle_to(&b) < 1e-12);
    }

    #[test]
    fn rotation_angle_is_symmetric() {
        let a = RigidTransform::rotation_axis_angle(Vec3::new(1.0f64, 1.0, 0.0), 0.4);
        let b = RigidTransform::rotation_axis_angle(Vec3::new(0.0, 1.0, 1.0), -0.9);
        let d1 = a.rotation_angle_to(&b);
        let d2 = b.rotation_angle_to(&a);
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn distances_preserved_under_transform() {
        let t = RigidTransform::rotation_axis_angle(Vec3::new(0.2f64, -1.0, 0.7), 1.1)
            .with_translation(Vec3::new(5.0, -2.0, 0.01));
        let p = Vec3::new(0.1, 0.2, 0.3);
        let q = Vec3::new(-1.0, 0.5, 2.0);
        let d0 = p.distance(&q);
        let d1 = t.apply(&p).distance(&t.apply(&q));
        assert!((d0 - d1).abs() < 1e-9);
    }
}
