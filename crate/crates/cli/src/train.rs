use std::path::Path;

use cloudpose_ingestion::{crop_rgb, load_rgb_png, DatasetManifest};
use cloudpose_recognition::{
    extract_baseline_embedding, load_external_embedding, train_classifier, Embedding,
    LogisticModel, TrainParams, TrainReport,
};

use crate::error::Result;

/// Collects one labeled embedding per annotation in the dataset.
///
/// By default embeddings are the built-in color histograms of the RGB
/// crops. When `embedding_dir` is given, a precomputed vector is loaded
/// from `<dir>/<frame_id>_<annotation index>.emb` instead, which is how
/// an external CNN feature extractor plugs in.
pub fn collect_training_set(
    manifest: &DatasetManifest,
    dim: usize,
    embedding_dir: Option<&Path>,
) -> Result<(Vec<Embedding>, Vec<String>)> {
    let mut embeddings = Vec::new();
    let mut labels = Vec::new();
    for frame in &manifest.frames {
        let rgb = load_rgb_png(&frame.rgb)?;
        for (index, annotation) in frame.annotations.iter().enumerate() {
            let embedding = match embedding_dir {
                Some(dir) => {
                    let path = dir.join(format!("{}_{index}.emb", frame.id));
                    load_external_embedding(&path, dim)?
                }
                None => {
                    let crop = crop_rgb(&rgb, &manifest.intrinsics, &annotation.bbox)?;
                    extract_baseline_embedding(&crop, dim)?
                }
            };
            embeddings.push(embedding);
            labels.push(annotation.label.clone());
        }
    }
    Ok((embeddings, labels))
}

/// Trains the instance classifier on every annotation in the dataset.
pub fn train_from_manifest(
    manifest: &DatasetManifest,
    dim: usize,
    embedding_dir: Option<&Path>,
    params: &TrainParams,
) -> Result<(LogisticModel, TrainReport)> {
    let (embeddings, labels) = collect_training_set(manifest, dim, embedding_dir)?;
    Ok(train_classifier(&embeddings, &labels, params)?)
}
