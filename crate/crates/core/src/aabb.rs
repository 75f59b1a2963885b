//! Axis-aligned bounding boxes.

use crate::{Error, Real, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aabb<R> {
    pub min: Vec3<R>,
    pub max: Vec3<R>,
}

impl<R: Real> Aabb<R> {
    pub fn new(min: Vec3<R>, max: Vec3<R>) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidParameter("non-finite box corner".into()));
        }
        if min.x > max.x || min.y > max.y || min.z > max.z {
            return Err(Error::InvalidParameter(
                "box min exceeds max on some axis".into(),
            ));
        }
        Ok(Aabb { min, max })
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Vec3<R>>>(points: I) -> Result<Self>
    where
        R: 'a,
    {
        let mut it = points.into_iter();
        let first = it.next().ok_or(Error::EmptyCloud)?;
        let mut min = *first;
        let mut max = *first;
        for p in it {
            min = min.min_by_component(p);
            max = max.max_by_component(p);
        }
        Aabb::new(min, max)
    }

    pub fn extent(&self) -> Vec3<R> {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3<R> {
        (self.min + self.max) * R::c(0.5)
    }

    pub fn volume(&self) -> R {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn diagonal(&self) -> R {
        self.extent().norm()
    }

    /// Overlap region, `None` when the boxes are disjoint. Boxes that only
    /// touch on a face share a zero-volume intersection.
    pub fn intersection(&self, other: &Self) -> Option<Self> {
        let min = self.min.max_by_component(&other.min);
        let max = self.max.min_by_component(&other.max);
        if min.x > max.x || min.y > max.y || min.z > max.z {
            None
        } else {
            Some(Aabb { min, max })
        }
    }

    pub fn contains(&self, p: &Vec3<R>) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn cast<S: Real>(&self) -> Aabb<S> {
        Aabb {
            min: self.min.cast(),
            max: self.max.cast(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box_at(origin: [f64; 3]) -> Aabb<f64> {
        Aabb::new(
            Vec3::from_array(origin),
            Vec3::from_array(origin) + Vec3::new(1.0, 1.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn volume_of_unit_box() {
        assert_eq!(unit_box_at([0.0; 3]).volume(), 1.0);
    }

    #[test]
    fn disjoint_boxes_do_not_intersect() {
        let a = unit_box_at([0.0; 3]);
        let b = unit_box_at([5.0, 0.0, 0.0]);
        assert!(a.intersection(&b).is_none());
    }

    #[test]
    fn half_shifted_boxes_share_half_a_volume() {
        let a = unit_box_at([0.0; 3]);
        let b = unit_box_at([0.5, 0.0, 0.0]);
        let i = a.intersection(&b).unwrap();
        assert!((i.volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn from_points_is_tight() {
        let pts = [
            Vec3::new(0.0, -1.0, 2.0),
            Vec3::new(3.0, 0.5, -0.5),
            Vec3::new(1.0, 2.0, 0.0),
        ];
        let b = Aabb::from_points(pts.iter()).unwrap();
        assert_eq!(b.min, Vec3::new(0.0, -1.0, -0.5));
        assert_eq!(b.max, Vec3::new(3.0, 2.0, 2.0));
    }

    #[test]
    fn inverted_corners_rejected() {
        assert!(Aabb::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 1.0)).is_err());
    }
}
