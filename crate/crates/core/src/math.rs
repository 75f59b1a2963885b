//! Minimal fixed-size linear algebra: 3-vectors and 3x3 matrices.

use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3<R> {
    pub x: R,
    pub y: R,
    pub z: R,
}

impl<R: Real> Vec3<R> {
    pub fn new(x: R, y: R, z: R) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zeros() -> Self {
        Vec3::new(R::zero(), R::zero(), R::zero())
    }

    pub fn splat(v: R) -> Self {
        Vec3::new(v, v, v)
    }

    pub fn dot(&self, rhs: &Self) -> R {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(&self, rhs: &Self) -> Self {
        Vec3::new(
            self.y * rhs.z - self.z * rhs.y,
            self.z * rhs.x - self.x * rhs.z,
            self.x * rhs.y - self.y * rhs.x,
        )
    }

    pub fn norm_squared(&self) -> R {
        self.dot(self)
    }

    pub fn norm(&self) -> R {
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, rhs: &Self) -> R {
        (*self - *rhs).norm()
    }

    pub fn distance_squared(&self, rhs: &Self) -> R {
        (*self - *rhs).norm_squared()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > R::zero() {
            Some(*self / n)
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn min_by_component(&self, rhs: &Self) -> Self {
        Vec3::new(self.x.min(rhs.x), self.y.min(rhs.y), self.z.min(rhs.z))
    }

    pub fn max_by_component(&self, rhs: &Self) -> Self {
        Vec3::new(self.x.max(rhs.x), self.y.max(rhs.y), self.z.max(rhs.z))
    }

    pub fn to_array(&self) -> [R; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [R; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn cast<S: Real>(&self) -> Vec3<S> {
        Vec3::new(
            S::from_f64(self.x.to_f64().unwrap()).unwrap(),
            S::from_f64(self.y.to_f64().unwrap()).unwrap(),
            S::from_f64(self.z.to_f64().unwrap()).unwrap(),
        )
    }
}

impl<R: Real> Index<usize> for Vec3<R> {
    type Output = R;
    fn index(&self, i: usize) -> &R {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("vector index {i} out of range"),
        }
    }
}

impl<R: Real> IndexMut<usize> for Vec3<R> {
    fn index_mut(&mut self, i: usize) -> &mut R {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("vector index {i} out of range"),
        }
    }
}

impl<R: Real> Add for Vec3<R> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<R: Real> AddAssign for Vec3<R> {
    fn add_assign(&mut self, rhs: Self) {
        self.x += rhs.x;
        self.y += rhs.y;
        self.z += rhs.z;
    }
}

impl<R: Real> Sub for Vec3<R> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<R: Real> SubAssign for Vec3<R> {
    fn sub_assign(&mut self, rhs: Self) {
        self.x -= rhs.x;
        self.y -= rhs.y;
        self.z -= rhs.z;
    }
}

impl<R: Real> Neg for Vec3<R> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl<R: Real> Mul<R> for Vec3<R> {
    type Output = Self;
    fn mul(self, s: R) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<R: Real> Div<R> for Vec3<R> {
    type Output = Self;
    fn div(self, s: R) -> Self {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mat3<R> {
    pub m: [[R; 3]; 3],
}

impl<R: Real> Default for Mat3<R> {
    fn default() -> Self {
        Mat3::identity()
    }
}

impl<R: Real> Mat3<R> {
    pub fn from_rows(r0: [R; 3], r1: [R; 3], r2: [R; 3]) -> Self {
        Mat3 { m: [r0, r1, r2] }
    }

    pub fn identity() -> Self {
        let (o, l) = (R::zero(), R::one());
        Mat3::from_rows([l, o, o], [o, l, o], [o, o, l])
    }

    pub fn zeros() -> Self {
        Mat3 {
            m: [[R::zero(); 3]; 3],
        }
    }

    /// Skew-symmetric cross-product matrix: `skew(v) * w == v x w`.
    pub fn skew(v: &Vec3<R>) -> Self {
        let o = R::zero();
        Mat3::from_rows([o, -v.z, v.y], [v.z, o, -v.x], [-v.y, v.x, o])
    }

    /// Outer product `a * b^T`.
    pub fn outer(a: &Vec3<R>, b: &Vec3<R>) -> Self {
        let mut m = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.m[i][j] = a[i] * b[j];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn det(&self) -> R {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> R {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn row(&self, i: usize) -> Vec3<R> {
        Vec3::from_array(self.m[i])
    }

    pub fn col(&self, j: usize) -> Vec3<R> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == R::zero() {
            return None;
        }
        let m = &self.m;
        let mut inv = Mat3::zeros();
        inv.m[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
        inv.m[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
        inv.m[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
        inv.m[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
        inv.m[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
        inv.m[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
        inv.m[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
        inv.m[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
        inv.m[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        for i in 0..3 {
            for j in 0..3 {
                inv.m[i][j] /= d;
            }
        }
        Some(inv)
    }

    pub fn cast<S: Real>(&self) -> Mat3<S> {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = S::from_f64(self.m[i][j].to_f64().unwrap()).unwrap();
            }
        }
        out
    }
}

impl<R: Real> Mul<Vec3<R>> for Mat3<R> {
    type Output = Vec3<R>;
    fn mul(self, v: Vec3<R>) -> Vec3<R> {
        Vec3::new(
            self.row(0).dot(&v),
            self.row(1).dot(&v),
            self.row(2).dot(&v),
        )
    }
}

impl<R: Real> Mul for Mat3<R> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = R::zero();
                for k in 0..3 {
                    acc += self.m[i][k] * rhs.m[k][j];
                }
                out.m[i][j] = acc;
            }
        }
        out
    }
}

impl<R: Real> Add for Mat3<R> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][j] + rhs.m[i][j];
            }
        }
        out
    }
}

impl<R: Real> Sub for Mat3<R> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][j] - rhs.m[i][j];
            }
        }
        out
    }
}

impl<R: Real> Mul<R> for Mat3<R> {
    type Output = Self;
    fn mul(self, s: R) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] *= s;
            }
        }
        out
    }
}
