//! Point cloud container: positions with optional per-point normals and
//! colors.

use crate::{Aabb, Error, Real, Result, RigidTransform, Vec3};

/// Unit-length tolerance for stored normals.
pub const NORMAL_TOL: f64 = 1e-6;

/// Positions plus optional attributes, all index-aligned.
///
/// Normals are unit vectors; the zero vector is the "no reliable estimate
/// here" flag that normal estimation leaves on degenerate neighborhoods.
/// Colors are RGB in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PointCloud<R> {
    points: Vec<Vec3<R>>,
    normals: Option<Vec<Vec3<R>>>,
    colors: Option<Vec<Vec3<R>>>,
}

impl<R: Real> PointCloud<R> {
    pub fn new() -> Self {
        PointCloud {
            points: Vec::new(),
            normals: None,
            colors: None,
        }
    }

    pub fn from_points(points: Vec<Vec3<R>>) -> Result<Self> {
        for p in &points {
            if !p.is_finite() {
                return Err(Error::InvalidParameter("non-finite point".into()));
            }
        }
        Ok(PointCloud {
            points,
            normals: None,
            colors: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3<R>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec3<R> {
        self.points[i]
    }

    pub fn normals(&self) -> Option<&[Vec3<R>]> {
        self.normals.as_deref()
    }

    pub fn colors(&self) -> Option<&[Vec3<R>]> {
        self.colors.as_deref()
    }

    pub fn has_normals(&self) -> bool {
        self.normals.is_some()
    }

    pub fn has_colors(&self) -> bool {
        self.colors.is_some()
    }

    /// A normal slot counts as valid when it holds a unit vector; the zero
    /// vector marks a failed estimate.
    pub fn normal_is_valid(&self, i: usize) -> bool {
        match &self.normals {
            Some(ns) => ns[i] != Vec3::zeros(),
            None => false,
        }
    }

    pub fn set_normals(&mut self, normals: Vec<Vec3<R>>) -> Result<()> {
        if normals.len() != self.points.len() {
            return Err(Error::InvalidParameter(format!(
                "normal count {} does not match point count {}",
                normals.len(),
                self.points.len()
            )));
        }
        let tol = R::c(NORMAL_TOL);
        for n in &normals {
            if !n.is_finite() {
                return Err(Error::InvalidParameter("non-finite normal".into()));
            }
            let len = n.norm();
            if len != R::zero() && (len - R::one()).abs() > tol {
                return Err(Error::InvalidParameter(
                    "normals must be unit length or the zero invalid flag".into(),
                ));
            }
        }
        self.normals = Some(normals);
        Ok(())
    }

    pub fn set_colors(&mut self, colors: Vec<Vec3<R>>) -> Result<()> {
        if colors.len() != self.points.len() {
            return Err(Error::InvalidParameter(format!(
                "color count {} does not match point count {}",
                colors.len(),
                self.points.len()
            )));
        }
        for c in &colors {
            if !c.is_finite()
                || c.x < R::zero()
                || c.x > R::one()
                || c.y < R::zero()
                || c.y > R::one()
                || c.z < R::zero()
                || c.z > R::one()
            {
                return Err(Error::InvalidParameter("color outside [0, 1]".into()));
            }
        }
        self.colors = Some(colors);
        Ok(())
    }

    pub fn clear_normals(&mut self) {
        self.normals = None;
    }

    /// Rigidly move the cloud; normals rotate, colors ride along.
    pub fn transformed(&self, t: &RigidTransform<R>) -> Self {
        let points = self.points.iter().map(|p| t.apply(p)).collect();
        let normals = self.normals.as_ref().map(|ns| {
            ns.iter()
                .map(|n| {
                    if *n == Vec3::zeros() {
                        *n
                    } else {
                        t.rotate(n)
                    }
                })
                .collect()
        });
        PointCloud {
            points,
            normals,
            colors: self.colors.clone(),
        }
    }

    pub fn bounding_box(&self) -> Result<Aabb<R>> {
        Aabb::from_points(self.points.iter())
    }

    pub fn centroid(&self) -> Result<Vec3<R>> {
        if self.points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut acc = Vec3::zeros();
        for p in &self.points {
            acc += *p;
        }
        Ok(acc / R::from_usize(self.points.len()).unwrap())
    }

    /// Keep the rows selected by `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            if i >= self.points.len() {
                return Err(Error::InvalidParameter(format!(
                    "index {i} out of range for cloud of {}",
                    self.points.len()
                )));
            }
        }
        Ok(PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| indices.iter().map(|&i| ns[i]).collect()),
            colors: self
                .colors
                .as_ref()
                .map(|cs| indices.iter().map(|&i| cs[i]).collect()),
        })
    }

    pub fn cast<S: Real>(&self) -> PointCloud<S> {
        PointCloud {
            points: self.points.iter().map(|p| p.cast()).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| n.cast()).collect()),
            colors: self
                .colors
                .as_ref()
                .map(|cs| cs.iter().map(|c| c.cast()).collect()),
        }
    }
}
