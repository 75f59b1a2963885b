use cloudpose_core::{PointCloud, Vec3};
use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::camera::CameraIntrinsics;
use crate::depth::DepthMap;
use crate::error::{Error, Result};

/// Pixel-space rectangle, `[x, y, w, h]` in annotations. The origin may lie
/// outside the image; cropping clips to the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[i32; 4]", into = "[i32; 4]")]
pub struct BBox2d {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl BBox2d {
    pub fn new(x: i32, y: i32, w: i32, h: i32) -> Result<Self> {
        if w <= 0 || h <= 0 {
            return Err(Error::Parse(format!("bounding box {w}x{h} has no area")));
        }
        Ok(BBox2d { x, y, w, h })
    }

    /// Pixel range `[x0, x1) x [y0, y1)` after clipping to `w x h` bounds,
    /// or `None` when the box misses the image entirely.
    fn clipped(&self, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
        let x0 = self.x.max(0) as u32;
        let y0 = self.y.max(0) as u32;
        let x1 = (self.x.saturating_add(self.w)).clamp(0, width as i32) as u32;
        let y1 = (self.y.saturating_add(self.h)).clamp(0, height as i32) as u32;
        (x0 < x1 && y0 < y1).then_some((x0, y0, x1, y1))
    }
}

impl TryFrom<[i32; 4]> for BBox2d {
    type Error = String;

    fn try_from(v: [i32; 4]) -> std::result::Result<Self, String> {
        BBox2d::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
    }
}

impl From<BBox2d> for [i32; 4] {
    fn from(b: BBox2d) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

fn check_dims(k: &CameraIntrinsics, got_w: u32, got_h: u32) -> Result<()> {
    if got_w != k.width || got_h != k.height {
        return Err(Error::DimensionMismatch {
            want_w: k.width,
            want_h: k.height,
            got_w,
            got_h,
        });
    }
    Ok(())
}

/// Back-projects every valid-depth pixel in `[x0,x1) x [y0,y1)`, row-major.
fn project_region(
    depth: &DepthMap,
    rgb: Option<&RgbImage>,
    k: &CameraIntrinsics,
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
) -> Result<PointCloud<f64>> {
    let mut points = Vec::new();
    let mut colors = rgb.map(|_| Vec::new());
    for v in y0..y1 {
        for u in x0..x1 {
            let d = depth.get(u, v);
            if d == 0 {
                continue;
            }
            let z = d as f64 / k.depth_scale;
            let x = (u as f64 - k.cx) * z / k.fx;
            let y = (v as f64 - k.cy) * z / k.fy;
            points.push(Vec3::new(x, y, z));
            if let (Some(colors), Some(rgb)) = (&mut colors, rgb) {
                let p = rgb.get_pixel(u, v).0;
                colors.push(Vec3::new(
                    p[0] as f64 / 255.0,
                    p[1] as f64 / 255.0,
                    p[2] as f64 / 255.0,
                ));
            }
        }
    }
    let mut cloud = PointCloud::from_points(points)?;
    if let Some(colors) = colors {
        cloud.set_colors(colors)?;
    }
    Ok(cloud)
}

/// Converts a whole frame to a point cloud by pinhole back-projection:
/// `z = d / depth_scale`, `x = (u - cx) z / fx`, `y = (v - cy) z / fy`.
/// Zero-depth pixels are skipped; colors are attached when `rgb` is given.
pub fn depth_to_cloud(
    depth: &DepthMap,
    rgb: Option<&RgbImage>,
    k: &CameraIntrinsics,
) -> Result<PointCloud<f64>> {
    k.validate()?;
    check_dims(k, depth.width(), depth.height())?;
    if let Some(rgb) = rgb {
        check_dims(k, rgb.width(), rgb.height())?;
    }
    project_region(depth, rgb, k, 0, 0, depth.width(), depth.height())
}

/// Same projection restricted to the pixels of a 2D bounding box.
pub fn crop_by_bbox(
    depth: &DepthMap,
    rgb: Option<&RgbImage>,
    k: &CameraIntrinsics,
    bbox: &BBox2d,
) -> Result<PointCloud<f64>> {
    k.validate()?;
    check_dims(k, depth.width(), depth.height())?;
    if let Some(rgb) = rgb {
        check_dims(k, rgb.width(), rgb.height())?;
    }
    let Some((x0, y0, x1, y1)) = bbox.clipped(depth.width(), depth.height()) else {
        return Err(Error::EmptyCrop);
    };
    let cloud = project_region(depth, rgb, k, x0, y0, x1, y1)?;
    if cloud.is_empty() {
        return Err(Error::EmptyCrop);
    }
    Ok(cloud)
}

/// The matching RGB crop for a bounding box, used by the classifier stage.
pub fn crop_rgb(rgb: &RgbImage, k: &CameraIntrinsics, bbox: &BBox2d) -> Result<RgbImage> {
    check_dims(k, rgb.width(), rgb.height())?;
    let Some((x0, y0, x1, y1)) = bbox.clipped(rgb.width(), rgb.height()) else {
        return Err(Error::EmptyCrop);
    };
    let mut out = RgbImage::new(x1 - x0, y1 - y0);
    for v in y0..y1 {
        for u in x0..x1 {
            out.put_pixel(u - x0, v - y0, *rgb.get_pixel(u, v));
        }
    }
    Ok(out)
}
