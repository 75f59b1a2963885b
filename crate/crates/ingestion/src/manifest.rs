use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::CameraIntrinsics;
use crate::error::{Error, Result};
use crate::project::BBox2d;

/// Ground-truth annotation: what object a 2D box contains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: String,
    pub bbox: BBox2d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameManifest {
    pub id: String,
    pub rgb: PathBuf,
    pub depth: PathBuf,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
}

/// Top-level dataset description: shared intrinsics plus one entry per
/// frame. Image paths are stored relative to the manifest file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub intrinsics: CameraIntrinsics,
    pub frames: Vec<FrameManifest>,
}

/// Parses a dataset manifest and resolves its image paths against the
/// manifest's directory, verifying every referenced file exists.
pub fn load_dataset_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path)?;
    let mut manifest: DatasetManifest = serde_json::from_str(&text)?;
    manifest.intrinsics.validate()?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    for frame in &mut manifest.frames {
        if frame.id.is_empty() {
            return Err(Error::Parse("frame with an empty id".into()));
        }
        frame.rgb = resolve(base, &frame.rgb)?;
        frame.depth = resolve(base, &frame.depth)?;
    }
    Ok(manifest)
}

fn resolve(base: &Path, p: &Path) -> Result<PathBuf> {
    let full = if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    };
    if !full.is_file() {
        return Err(Error::MissingFile(full));
    }
    Ok(full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::{save_depth_png, DepthMap};

    fn write_frame_files(dir: &Path) {
        fs::create_dir_all(dir.join("img")).unwrap();
        let depth = DepthMap::new(4, 3, vec![800; 12]).unwrap();
        save_depth_png(&depth, &dir.join("img/d0.png")).unwrap();
        image::RgbImage::new(4, 3).save(dir.join("img/c0.png")).unwrap();
    }

    fn manifest_text() -> String {
        r#"{
            "intrinsics": {"fx":570.3,"fy":570.3,"cx":319.5,"cy":239.5,"width":640,"height":480,"depth_scale":1000.0},
            "frames": [
                {"id":"f0","rgb":"img/c0.png","depth":"img/d0.png",
                 "annotations":[{"label":"mug","bbox":[10,20,30,40]}]}
            ]
        }"#
        .to_string()
    }

    #[test]
    fn paths_resolve_relative_to_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write_frame_files(dir.path());
        let path = dir.path().join("dataset.json");
        fs::write(&path, manifest_text()).unwrap();

        let m = load_dataset_manifest(&path).unwrap();
        assert_eq!(m.frames.len(), 1);
        assert_eq!(m.frames[0].id, "f0");
        assert!(m.frames[0].rgb.is_absolute() || m.frames[0].rgb.starts_with(dir.path()));
        assert!(m.frames[0].depth.ends_with("img/d0.png"));
        assert_eq!(m.frames[0].annotations[0].label, "mug");
        assert_eq!(
            m.frames[0].annotations[0].bbox,
            BBox2d::new(10, 20, 30, 40).unwrap()
        );
    }

    #[test]
    fn missing_referenced_files_fail_the_load() {
        let dir = tempfile::tempdir().unwrap();
        write_frame_files(dir.path());
        fs::remove_file(dir.path().join("img/d0.png")).unwrap();
        let path = dir.path().join("dataset.json");
        fs::write(&path, manifest_text()).unwrap();
        assert!(matches!(
            load_dataset_manifest(&path),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn malformed_json_is_a_manifest_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.json");
        fs::write(&path, "{ nope").unwrap();
        assert!(matches!(
            load_dataset_manifest(&path),
            Err(Error::Manifest(_))
        ));
    }

    #[test]
    fn empty_frame_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_frame_files(dir.path());
        let path = dir.path().join("dataset.json");
        fs::write(&path, manifest_text().replace("\"f0\"", "\"\"")).unwrap();
        assert!(matches!(load_dataset_manifest(&path), Err(Error::Parse(_))));
    }
}
