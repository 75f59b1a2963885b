//! Geometry core for RGB-D object localization: point clouds, voxel
//! filtering, normal estimation, FPFH descriptors and rigid registration
//! (RANSAC, graduated non-convexity, point-to-plane ICP).
//!
//! Everything numeric is generic over the scalar type through [`Real`];
//! `f32`/`f64` aliases for the main types live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub mod aabb;
pub mod cloud;
pub mod error;
pub mod fpfh;
pub mod kdtree;
pub mod linalg;
pub mod math;
pub mod normals;
pub mod ply;
pub mod registration;
pub mod transform;
pub mod voxel;

pub use aabb::Aabb;
pub use cloud::PointCloud;
pub use error::{Error, Result};
pub use fpfh::{compute_fpfh, compute_spfh, FeatureSet, FpfhDescriptor, FPFH_DIM};
pub use kdtree::KdTree;
pub use math::{Mat3, Vec3};
pub use normals::estimate_normals;
pub use ply::{read_ply, write_ply, PlyFormat};
pub use registration::{
    estimate_rigid, fgr_registration, icp_point_to_plane, match_features, ransac_registration,
    registration_rmse, Correspondence, FgrParams, IcpParams, IcpResult, RansacParams,
    RegistrationResult, RmseReport,
};
pub use transform::RigidTransform;
pub use voxel::voxel_downsample;

/// Scalar bound for all geometry in this crate.
///
/// Blanket-implemented for `f32` and `f64`; anything float-like with the
/// usual numeric conversions will do.
pub trait Real:
    'static
    + Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
{
    /// Shorthand for lossy conversion from `f64` constants.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Vec3F32 = math::Vec3<f32>;
pub type Vec3F64 = math::Vec3<f64>;
pub type Mat3F32 = math::Mat3<f32>;
pub type Mat3F64 = math::Mat3<f64>;
pub type PointCloudF32 = cloud::PointCloud<f32>;
pub type PointCloudF64 = cloud::PointCloud<f64>;
pub type RigidTransformF32 = transform::RigidTransform<f32>;
pub type RigidTransformF64 = transform::RigidTransform<f64>;
pub type AabbF32 = aabb::Aabb<f32>;
pub type AabbF64 = aabb::Aabb<f64>;
pub type KdTreeF32 = kdtree::KdTree<f32>;
pub type KdTreeF64 = kdtree::KdTree<f64>;
