use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole camera model plus the depth encoding.
///
/// `depth_scale` is depth units per meter; the conventional 16-bit
/// millimeter encoding gives 1000.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    #[serde(default = "default_depth_scale")]
    pub depth_scale: f64,
}

fn default_depth_scale() -> f64 {
    1000.0
}

impl Default for CameraIntrinsics {
    /// Conventional values for the structured-light sensor class that
    /// produced the reference dataset; configuration, not measurement.
    fn default() -> Self {
        CameraIntrinsics {
            fx: 570.3,
            fy: 570.3,
            cx: 319.5,
            cy: 239.5,
            width: 640,
            height: 480,
            depth_scale: 1000.0,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        let focal_ok = self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0;
        let center_ok = self.cx.is_finite() && self.cy.is_finite();
        let scale_ok = self.depth_scale.is_finite() && self.depth_scale > 0.0;
        if !focal_ok || !center_ok || !scale_ok || self.width == 0 || self.height == 0 {
            return Err(Error::Parse("invalid camera intrinsics".into()));
        }
        Ok(())
    }
}
