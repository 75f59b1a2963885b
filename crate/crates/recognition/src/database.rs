use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cloudpose_core::{read_ply, write_ply, FeatureSet, PlyFormat, PointCloud, RigidTransform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry parameters the database views were processed with. A query run
/// with different values would produce descriptors that are not comparable
/// to the stored ones, so loads are checked against the pipeline settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub leaf_m: f64,
    pub fpfh_radius_m: f64,
}

impl BuildParams {
    fn validate(&self) -> Result<()> {
        if !(self.leaf_m.is_finite() && self.leaf_m > 0.0)
            || !(self.fpfh_radius_m.is_finite() && self.fpfh_radius_m > 0.0)
        {
            return Err(Error::InvalidParameter(
                "build parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One stored viewpoint of a known object instance: the preprocessed cloud,
/// its descriptors, and optionally the pose the view was captured from.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectView {
    instance_label: String,
    view_id: u32,
    cloud: PointCloud<f64>,
    features: FeatureSet,
    pose_hint: Option<RigidTransform<f64>>,
}

impl ObjectView {
    pub fn new(
        instance_label: String,
        view_id: u32,
        cloud: PointCloud<f64>,
        features: FeatureSet,
        pose_hint: Option<RigidTransform<f64>>,
    ) -> Result<Self> {
        check_label(&instance_label)?;
        if cloud.is_empty() {
            return Err(Error::Core(cloudpose_core::Error::EmptyCloud));
        }
        if !cloud.has_normals() {
            return Err(Error::InvalidParameter(format!(
                "view {view_id} of '{instance_label}' has no normals"
            )));
        }
        if let Some(&bad) = features
            .keypoint_indices()
            .iter()
            .find(|&&i| i as usize >= cloud.len())
        {
            return Err(Error::InvalidParameter(format!(
                "feature keypoint {bad} is outside the view cloud"
            )));
        }
        Ok(Self {
            instance_label,
            view_id,
            cloud,
            features,
            pose_hint,
        })
    }

    pub fn instance_label(&self) -> &str {
        &self.instance_label
    }

    pub fn view_id(&self) -> u32 {
        self.view_id
    }

    pub fn cloud(&self) -> &PointCloud<f64> {
        &self.cloud
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn pose_hint(&self) -> Option<&RigidTransform<f64>> {
        self.pose_hint.as_ref()
    }
}

/// Instance labels double as directory names on disk.
fn check_label(label: &str) -> Result<()> {
    let ok = !label.is_empty()
        && label != "."
        && label != ".."
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "instance label '{label}' is not filesystem safe"
        )))
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestView {
    view_id: u32,
    cloud: String,
    features: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pose_hint: Option<RigidTransform<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ManifestInstance {
    label: String,
    views: Vec<ManifestView>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    params: BuildParams,
    instances: Vec<ManifestInstance>,
}

/// All stored views of all known instances, keyed by instance label.
///
/// On disk the database is one directory per instance holding a PLY and a
/// descriptor file per view, plus `manifest.json` tying them together.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDatabase {
    instances: BTreeMap<String, Vec<ObjectView>>,
    params: BuildParams,
}

impl ModelDatabase {
    pub fn new(params: BuildParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            instances: BTreeMap::new(),
            params,
        })
    }

    /// Views of one instance stay sorted by view id; ids must be unique.
    pub fn add_view(&mut self, view: ObjectView) -> Result<()> {
        let views = self
            .instances
            .entry(view.instance_label.clone())
            .or_default();
        match views.binary_search_by_key(&view.view_id, |v| v.view_id) {
            Ok(_) => Err(Error::InvalidParameter(format!(
                "duplicate view id {} for '{}'",
                view.view_id, view.instance_label
            ))),
            Err(pos) => {
                views.insert(pos, view);
                Ok(())
            }
        }
    }

    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.instances.keys().map(String::as_str)
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn view_count(&self) -> usize {
        self.instances.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn views(&self, label: &str) -> Result<&[ObjectView]> {
        self.instances
            .get(label)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownInstance(label.to_string()))
    }

    /// Rejects a database whose preprocessing differs from the settings the
    /// current run will use for scene crops.
    pub fn check_compatible(&self, expected: &BuildParams) -> Result<()> {
        if self.params == *expected {
            Ok(())
        } else {
            Err(Error::Incompatible(format!(
                "built with leaf {} m / radius {} m, run requests leaf {} m / radius {} m",
                self.params.leaf_m, self.params.fpfh_radius_m, expected.leaf_m, expected.fpfh_radius_m
            )))
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        if self.instances.is_empty() {
            return Err(Error::InvalidParameter(
                "refusing to save an empty database".into(),
            ));
        }
        fs::create_dir_all(dir)?;
        let mut manifest = Manifest {
            params: self.params,
            instances: Vec::new(),
        };
        for (label, views) in &self.instances {
            fs::create_dir_all(dir.join(label))?;
            let mut entry = ManifestInstance {
                label: label.clone(),
                views: Vec::new(),
            };
            for view in views {
                let cloud_rel = format!("{label}/view_{:04}.ply", view.view_id);
                let feat_rel = format!("{label}/view_{:04}.fpfh", view.view_id);
                write_ply(&view.cloud, &dir.join(&cloud_rel), PlyFormat::BinaryLittleEndian)?;
                view.features.save(&dir.join(&feat_rel))?;
                entry.views.push(ManifestView {
                    view_id: view.view_id,
                    cloud: cloud_rel,
                    features: feat_rel,
                    pose_hint: view.pose_hint.clone(),
                });
            }
            manifest.instances.push(entry);
        }
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join("manifest.json");
        let text = fs::read_to_string(&manifest_path)?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        let mut db = Self::new(manifest.params)?;
        if manifest.instances.is_empty() {
            return Err(Error::Parse("manifest lists no instances".into()));
        }
        for instance in manifest.instances {
            if instance.views.is_empty() {
                return Err(Error::Parse(format!(
                    "instance '{}' has no views",
                    instance.label
                )));
            }
            for mv in instance.views {
                let cloud = read_ply::<f64>(&resolve(dir, &mv.cloud)?)?;
                let features = FeatureSet::load(&resolve(dir, &mv.features)?)?;
                let view = ObjectView::new(
                    instance.label.clone(),
                    mv.view_id,
                    cloud,
                    features,
                    mv.pose_hint,
                )?;
                db.add_view(view)?;
            }
        }
        Ok(db)
    }
}

/// Manifest paths are relative to the database root; anything that could
/// escape it is rejected.
fn resolve(dir: &Path, rel: &str) -> Result<PathBuf> {
    let p = Path::new(rel);
    if p.is_absolute()
        || p.components()
            .any(|c| !matches!(c, std::path::Component::Normal(_)))
    {
        return Err(Error::Parse(format!("unsafe manifest path '{rel}'")));
    }
    Ok(dir.join(p))
}
