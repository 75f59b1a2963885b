use std::fs;
use std::path::Path;

use cloudpose_core::{FgrParams, IcpParams, RansacParams};
use cloudpose_recognition::{BuildParams, CoarseConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normal-estimation radius as a multiple of the voxel leaf. Two leaves
/// reach past the immediate grid neighbors without smearing edges; the
/// descriptor radius stays an independent setting.
pub const NORMAL_RADIUS_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CoarseMethod {
    Ransac,
    Fgr,
}

/// How deep the pipeline runs. Ordered: each mode includes the work of
/// the ones before it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    ClassifyOnly,
    Coarse,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    pub max_iterations: usize,
    /// Consecutive validated hypotheses without improvement before the
    /// search stops early.
    pub validation: usize,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            max_iterations: 4_000_000,
            validation: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FgrConfig {
    pub iterations: usize,
}

impl Default for FgrConfig {
    fn default() -> Self {
        FgrConfig { iterations: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IcpConfig {
    pub max_dist_m: f64,
    pub max_iterations: usize,
    pub rel_tol: f64,
}

impl Default for IcpConfig {
    fn default() -> Self {
        IcpConfig {
            max_dist_m: 0.01,
            max_iterations: 30,
            rel_tol: 1e-6,
        }
    }
}

/// Everything the pipeline needs to run, with the defaults the rest of
/// the toolkit is tuned around: 1 cm voxels, 5 cm descriptor radius,
/// 1 cm inlier threshold. A JSON config file may override any subset of
/// fields.
///
/// View clouds and scene crops are expected in the sensor frame; normal
/// estimation orients normals toward the origin (the camera).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub leaf_m: f64,
    pub fpfh_radius_m: f64,
    pub inlier_threshold_m: f64,
    pub coarse_method: CoarseMethod,
    pub ransac: RansacConfig,
    pub fgr: FgrConfig,
    pub icp: IcpConfig,
    pub views_per_instance: usize,
    pub min_correspondences: usize,
    pub seed: u64,
    pub execution_mode: ExecutionMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            leaf_m: 0.01,
            fpfh_radius_m: 0.05,
            inlier_threshold_m: 0.01,
            coarse_method: CoarseMethod::Ransac,
            ransac: RansacConfig::default(),
            fgr: FgrConfig::default(),
            icp: IcpConfig::default(),
            views_per_instance: 10,
            min_correspondences: 3,
            seed: 0,
            execution_mode: ExecutionMode::Full,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("leaf_m", self.leaf_m),
            ("fpfh_radius_m", self.fpfh_radius_m),
            ("inlier_threshold_m", self.inlier_threshold_m),
            ("icp.max_dist_m", self.icp.max_dist_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.icp.rel_tol.is_finite() && self.icp.rel_tol >= 0.0) {
            return Err(Error::InvalidConfig(
                "icp.rel_tol must be non-negative".into(),
            ));
        }
        if self.min_correspondences < 3 {
            return Err(Error::InvalidConfig(
                "min_correspondences must be at least 3 to determine a pose".into(),
            ));
        }
        if self.views_per_instance == 0 {
            return Err(Error::InvalidConfig(
                "views_per_instance must be at least 1".into(),
            ));
        }
        if self.ransac.max_iterations == 0 || self.fgr.iterations == 0 {
            return Err(Error::InvalidConfig(
                "iteration budgets must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn normal_radius(&self) -> f64 {
        NORMAL_RADIUS_FACTOR * self.leaf_m
    }

    /// Parameters a model database built under this config must carry.
    pub fn build_params(&self) -> BuildParams {
        BuildParams {
            leaf_m: self.leaf_m,
            fpfh_radius_m: self.fpfh_radius_m,
        }
    }

    pub fn coarse_config(&self, seed: u64) -> CoarseConfig {
        match self.coarse_method {
            CoarseMethod::Ransac => CoarseConfig::Ransac(RansacParams {
                max_iterations: self.ransac.max_iterations,
                validation_steps: self.ransac.validation,
                inlier_threshold: self.inlier_threshold_m,
                mutual_matching: false,
                seed,
            }),
            CoarseMethod::Fgr => CoarseConfig::Fgr(FgrParams {
                iterations: self.fgr.iterations,
                inlier_threshold: self.inlier_threshold_m,
                seed,
                ..FgrParams::default()
            }),
        }
    }

    pub fn icp_params(&self) -> IcpParams<f64> {
        IcpParams {
            max_dist: self.icp.max_dist_m,
            max_iterations: self.icp.max_iterations,
            rel_tol: self.icp.rel_tol,
        }
    }
}

/// Reads a config file; missing fields keep their defaults, so a file
/// holding only `{"coarse_method": "fgr"}` is a complete configuration.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path)?;
    let cfg: PipelineConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_json_overrides_only_named_fields() {
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"coarse_method":"fgr","seed":9}"#).unwrap();
        assert_eq!(cfg.coarse_method, CoarseMethod::Fgr);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.leaf_m, 0.01);
        assert_eq!(cfg.ransac, RansacConfig::default());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = PipelineConfig {
            execution_mode: ExecutionMode::Coarse,
            views_per_instance: 4,
            ..PipelineConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: PipelineConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.leaf_m = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = PipelineConfig::default();
        cfg.min_correspondences = 2;
        assert!(cfg.validate().is_err());

        let mut cfg = PipelineConfig::default();
        cfg.icp.rel_tol = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn modes_are_ordered_by_depth() {
        assert!(ExecutionMode::ClassifyOnly < ExecutionMode::Coarse);
        assert!(ExecutionMode::Coarse < ExecutionMode::Full);
    }
}
