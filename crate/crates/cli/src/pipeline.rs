use std::fs;
use std::path::Path;
use std::time::Instant;

use cloudpose_core::{
    compute_fpfh, estimate_normals, icp_point_to_plane, voxel_downsample, Aabb, FeatureSet,
    PointCloud, RigidTransform, Vec3,
};
use cloudpose_evaluation::{
    aggregate_timings, iou_3d, mir, prc_auc, project_gt_box, DetectionRecord, PrCurve,
    StageTimings, TimingReport, PRC_CONVENTION,
};
use cloudpose_ingestion::{
    crop_by_bbox, crop_rgb, load_depth_png, load_rgb_png, CameraIntrinsics, DatasetManifest,
    DepthMap, FrameManifest,
};
use cloudpose_recognition::{
    extract_baseline_embedding, predict, select_best_view, select_views, LogisticModel,
    ModelDatabase,
};
use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExecutionMode, PipelineConfig};
use crate::error::{Error, Result};

/// Decides how deep to run for a given frame; the default policy is the
/// static mode from the config. A distance- or budget-aware scheduler
/// plugs in here.
pub type ModePolicy<'a> = dyn Fn(&FrameManifest) -> ExecutionMode + Send + Sync + 'a;

/// Downsamples a cloud, estimates normals oriented toward the camera at
/// the origin, and describes every resulting point.
pub fn prepare_cloud(
    raw: &PointCloud<f64>,
    cfg: &PipelineConfig,
) -> Result<(PointCloud<f64>, FeatureSet)> {
    let down = voxel_downsample(raw, cfg.leaf_m)?;
    let cloud = estimate_normals(&down, cfg.normal_radius(), Vec3::new(0.0, 0.0, 0.0))?;
    let keypoints: Vec<usize> = (0..cloud.len()).collect();
    let features = compute_fpfh(&cloud, &keypoints, cfg.fpfh_radius_m)?;
    Ok((cloud, features))
}

/// Stable per-annotation seed: identical runs must land on identical
/// random choices regardless of thread interleaving, so the seed
/// depends only on the config seed, the frame id, and the annotation's
/// position. FNV-style mixing keeps it platform-independent.
fn derive_seed(base: u64, frame_id: &str, annotation: usize) -> u64 {
    let mut h = base ^ 0x9e37_79b9_7f4a_7c15;
    for b in frame_id.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    (h ^ annotation as u64).wrapping_mul(0x0000_0100_0000_01b3)
}

struct FrameImages {
    rgb: RgbImage,
    depth: DepthMap,
}

fn blank_record(frame: &FrameManifest, label: &str) -> DetectionRecord {
    DetectionRecord {
        frame_id: frame.id.clone(),
        instance_label: label.to_string(),
        predicted_label: None,
        correspondence_count: 0,
        est_box: None,
        gt_box: None,
        iou: None,
        mir: None,
        stage_timings: StageTimings::default(),
        is_true_positive: false,
        error: None,
    }
}

/// Runs the staged pipeline over one frame's annotations. Stage
/// failures are recorded on the annotation's record and never abort the
/// frame; image I/O happens up front so stage timings measure compute
/// only.
pub fn run_frame(
    frame: &FrameManifest,
    intrinsics: &CameraIntrinsics,
    db: &ModelDatabase,
    model: &LogisticModel,
    cfg: &PipelineConfig,
    mode: ExecutionMode,
) -> Vec<DetectionRecord> {
    let images = match load_frame_images(frame) {
        Ok(images) => images,
        Err(e) => {
            return frame
                .annotations
                .iter()
                .map(|a| {
                    let mut r = blank_record(frame, &a.label);
                    r.error = Some(e.to_string());
                    r
                })
                .collect();
        }
    };

    frame
        .annotations
        .iter()
        .enumerate()
        .map(|(index, annotation)| {
            let mut record = blank_record(frame, &annotation.label);
            let seed = derive_seed(cfg.seed, &frame.id, index);
            run_annotation(
                &mut record,
                &annotation.bbox,
                &images,
                intrinsics,
                db,
                model,
                cfg,
                mode,
                seed,
            );
            record
        })
        .collect()
}

fn load_frame_images(frame: &FrameManifest) -> Result<FrameImages> {
    Ok(FrameImages {
        rgb: load_rgb_png(&frame.rgb)?,
        depth: load_depth_png(&frame.depth)?,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_annotation(
    record: &mut DetectionRecord,
    bbox: &cloudpose_ingestion::BBox2d,
    images: &FrameImages,
    intrinsics: &CameraIntrinsics,
    db: &ModelDatabase,
    model: &LogisticModel,
    cfg: &PipelineConfig,
    mode: ExecutionMode,
    seed: u64,
) {
    // GT projection is evaluation bookkeeping, not a pipeline stage; a
    // failure here also fails the scene crop below with a clearer error.
    record.gt_box = project_gt_box(bbox, &images.depth, intrinsics).ok();

    let classify_started = Instant::now();
    let predicted = crop_rgb(&images.rgb, intrinsics, bbox)
        .map_err(Error::Ingest)
        .and_then(|crop| Ok(extract_baseline_embedding(&crop, model.dim())?))
        .and_then(|embedding| Ok(predict(model, &embedding)?));
    record.stage_timings.classify = Some(classify_started.elapsed().as_secs_f64());
    let label = match predicted {
        Ok((label, _)) => {
            record.predicted_label = Some(label.clone());
            label
        }
        Err(e) => {
            record.error = Some(e.to_string());
            return;
        }
    };
    if mode < ExecutionMode::Coarse {
        return;
    }

    let coarse_started = Instant::now();
    let coarse = register_against_db(bbox, &images.depth, intrinsics, db, &label, cfg, seed);
    record.stage_timings.coarse = Some(coarse_started.elapsed().as_secs_f64());
    let (view_cloud, scene, mut transform) = match coarse {
        Ok((view_cloud, scene, result)) => {
            record.correspondence_count = result.inlier_count as u32;
            (view_cloud, scene, result.transform)
        }
        Err(e) => {
            record.error = Some(e.to_string());
            return;
        }
    };
    record.est_box = box_of(&view_cloud, &transform);

    if mode >= ExecutionMode::Full {
        let icp_started = Instant::now();
        let refined = icp_point_to_plane(&view_cloud, &scene, &transform, &cfg.icp_params());
        record.stage_timings.icp = Some(icp_started.elapsed().as_secs_f64());
        match refined {
            Ok(result) => {
                transform = result.transform;
                record.est_box = box_of(&view_cloud, &transform);
            }
            Err(e) => record.error = Some(e.to_string()),
        }
    }

    score_record(record);
}

/// Crops the scene, prepares it, and finds the best-aligning database
/// view of the predicted instance. Returns the winning view's cloud,
/// the prepared scene crop, and the registration.
fn register_against_db(
    bbox: &cloudpose_ingestion::BBox2d,
    depth: &DepthMap,
    intrinsics: &CameraIntrinsics,
    db: &ModelDatabase,
    label: &str,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<(
    PointCloud<f64>,
    PointCloud<f64>,
    cloudpose_core::RegistrationResult<f64>,
)> {
    db.check_compatible(&cfg.build_params())?;
    let crop = crop_by_bbox(depth, None, intrinsics, bbox)?;
    let (scene, scene_features) = prepare_cloud(&crop, cfg)?;
    let views = select_views(db, label, cfg.views_per_instance, seed)?;
    let (view, result) = select_best_view(
        &scene,
        &scene_features,
        &views,
        &cfg.coarse_config(seed),
        cfg.min_correspondences,
    )?;
    Ok((view.cloud().clone(), scene, result))
}

fn box_of(cloud: &PointCloud<f64>, transform: &RigidTransform<f64>) -> Option<Aabb<f64>> {
    cloud.transformed(transform).bounding_box().ok()
}

/// Fills iou/mir and the true-positive flag once both boxes exist. A
/// wrong predicted label is a false positive no matter how well the
/// boxes agree.
fn score_record(record: &mut DetectionRecord) {
    let (Some(gt), Some(est)) = (record.gt_box, record.est_box) else {
        return;
    };
    record.iou = Some(iou_3d(&gt, &est));
    match mir(&gt, &est) {
        Ok(v) => record.mir = Some(v),
        Err(e) => {
            record.error = Some(e.to_string());
            return;
        }
    }
    let label_ok = record.predicted_label.as_deref() == Some(record.instance_label.as_str());
    record.is_true_positive = label_ok
        && cloudpose_evaluation::is_true_positive(
            record.iou.unwrap_or(0.0),
            record.mir.unwrap_or(0.0),
        );
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub prc_convention: String,
}

/// Everything a run produces. Serialized field order is fixed so equal
/// runs give byte-equal files; only the timing values vary between
/// repeats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub metadata: ReportMetadata,
    pub total_ground_truth: usize,
    pub prc: Option<PrCurve>,
    pub timing: TimingReport,
    pub records: Vec<DetectionRecord>,
}

/// Scores a finished record set against the ground-truth counts.
pub fn report_from_records(
    cfg: &PipelineConfig,
    records: Vec<DetectionRecord>,
    gt_counts: &[usize],
) -> Result<RunReport> {
    for record in &records {
        record.validate()?;
    }
    let prc = match prc_auc(&records, gt_counts) {
        Ok(curve) => Some(curve),
        Err(cloudpose_evaluation::Error::UndefinedRecall) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(RunReport {
        config: cfg.clone(),
        metadata: ReportMetadata {
            prc_convention: PRC_CONVENTION.to_string(),
        },
        total_ground_truth: gt_counts.iter().sum(),
        prc,
        timing: aggregate_timings(&records),
        records,
    })
}

/// Runs every frame of the dataset, optionally across a worker pool,
/// and scores the result. Records keep manifest order regardless of the
/// thread count.
pub fn run_dataset(
    manifest: &DatasetManifest,
    db: &ModelDatabase,
    model: &LogisticModel,
    cfg: &PipelineConfig,
    threads: usize,
    policy: Option<&ModePolicy>,
) -> Result<RunReport> {
    cfg.validate()?;
    db.check_compatible(&cfg.build_params())?;
    let mode_of = |frame: &FrameManifest| match policy {
        Some(p) => p(frame),
        None => cfg.execution_mode,
    };

    let frame_records: Vec<Vec<DetectionRecord>> = if threads == 1 {
        manifest
            .frames
            .iter()
            .map(|f| run_frame(f, &manifest.intrinsics, db, model, cfg, mode_of(f)))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        pool.install(|| {
            manifest
                .frames
                .par_iter()
                .map(|f| run_frame(f, &manifest.intrinsics, db, model, cfg, mode_of(f)))
                .collect()
        })
    };

    let gt_counts: Vec<usize> = manifest.frames.iter().map(|f| f.annotations.len()).collect();
    let records: Vec<DetectionRecord> = frame_records.into_iter().flatten().collect();
    report_from_records(cfg, records, &gt_counts)
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Accepts either a full report or a bare record array, so reports can
/// be re-scored and external record sets evaluated alike.
pub fn load_records(path: &Path) -> Result<Vec<DetectionRecord>> {
    let text = fs::read_to_string(path)?;
    if let Ok(report) = serde_json::from_str::<RunReport>(&text) {
        return Ok(report.records);
    }
    Ok(serde_json::from_str(&text)?)
}
