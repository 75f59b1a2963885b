use std::fs;
use std::path::{Path, PathBuf};

use cloudpose_core::{read_ply, PointCloud};
use cloudpose_recognition::{ModelDatabase, ObjectView};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::pipeline::prepare_cloud;

/// What happened while scanning the views directory. Skipped files are
/// reported, not fatal; an instance whose every view fails is.
#[derive(Debug, Default)]
pub struct BuildOutcome {
    pub instances: usize,
    pub views: usize,
    pub skipped: Vec<(PathBuf, String)>,
}

/// Builds a model database from a directory of per-instance view
/// clouds: `<views_dir>/<label>/*.ply`. Every view is downsampled,
/// given normals, and described with the config's parameters; view ids
/// follow filename order.
pub fn build_database(
    views_dir: &Path,
    cfg: &PipelineConfig,
) -> Result<(ModelDatabase, BuildOutcome)> {
    cfg.validate()?;
    let mut labels: Vec<(String, PathBuf)> = Vec::new();
    for entry in fs::read_dir(views_dir)? {
        let entry = entry?;
        if entry.file_type()?.is_dir() {
            labels.push((entry.file_name().to_string_lossy().into_owned(), entry.path()));
        }
    }
    if labels.is_empty() {
        return Err(Error::NoInstances(views_dir.to_path_buf()));
    }
    labels.sort();

    let mut db = ModelDatabase::new(cfg.build_params())?;
    let mut outcome = BuildOutcome::default();
    for (label, dir) in labels {
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "ply"))
            .collect();
        files.sort();

        let mut view_id = 0u32;
        for file in files {
            match ingest_view(&label, view_id, &file, cfg) {
                Ok(view) => {
                    db.add_view(view)?;
                    view_id += 1;
                    outcome.views += 1;
                }
                Err(e) => outcome.skipped.push((file, e.to_string())),
            }
        }
        if view_id == 0 {
            return Err(Error::EmptyInstance(label));
        }
        outcome.instances += 1;
    }
    Ok((db, outcome))
}

fn ingest_view(label: &str, view_id: u32, path: &Path, cfg: &PipelineConfig) -> Result<ObjectView> {
    let raw: PointCloud<f64> = read_ply(path)?;
    let (cloud, features) = prepare_cloud(&raw, cfg)?;
    Ok(ObjectView::new(
        label.to_string(),
        view_id,
        cloud,
        features,
        None,
    )?)
}
