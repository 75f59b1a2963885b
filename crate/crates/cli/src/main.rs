use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use cloudpose_cli::{
    build_database, load_config, load_records, pipeline, run_dataset, synth, train_from_manifest,
    write_report, CoarseMethod, ExecutionMode, PipelineConfig, SynthParams,
};
use cloudpose_ingestion::load_dataset_manifest;
use cloudpose_recognition::{CoarseConfig, LogisticModel, ModelDatabase, TrainParams};

#[derive(Parser)]
#[command(
    name = "cloudpose",
    version,
    about = "Object recognition and 6DoF pose estimation over RGB-D frames"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a model database from per-instance view clouds
    BuildDb(BuildDbArgs),
    /// Train the instance classifier from dataset annotations
    Train(TrainArgs),
    /// Run the recognition pipeline over a dataset and write a report
    Run(RunArgs),
    /// Re-score an existing record set against a dataset's ground truth
    Evaluate(EvaluateArgs),
    /// Compare the coarse registration methods on synthetic scenes
    Bench(BenchArgs),
    /// Generate a synthetic dataset with views, frames and a manifest
    Synth(SynthArgs),
}

/// Config file plus per-key overrides; flags win over the file, the
/// file wins over defaults.
#[derive(Args)]
struct ConfigArgs {
    /// JSON pipeline config; missing fields keep their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    leaf_m: Option<f64>,
    #[arg(long)]
    fpfh_radius_m: Option<f64>,
    #[arg(long)]
    inlier_threshold_m: Option<f64>,
    #[arg(long, value_enum)]
    coarse_method: Option<CoarseMethod>,
    #[arg(long)]
    views_per_instance: Option<usize>,
    #[arg(long)]
    min_correspondences: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ExecutionMode>,
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path).with_context(|| format!("reading {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.leaf_m {
            cfg.leaf_m = v;
        }
        if let Some(v) = self.fpfh_radius_m {
            cfg.fpfh_radius_m = v;
        }
        if let Some(v) = self.inlier_threshold_m {
            cfg.inlier_threshold_m = v;
        }
        if let Some(v) = self.coarse_method {
            cfg.coarse_method = v;
        }
        if let Some(v) = self.views_per_instance {
            cfg.views_per_instance = v;
        }
        if let Some(v) = self.min_correspondences {
            cfg.min_correspondences = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.mode {
            cfg.execution_mode = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct BuildDbArgs {
    /// Directory holding <label>/*.ply view clouds
    #[arg(long)]
    views: PathBuf,
    /// Output database directory
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset manifest supplying labeled crops
    #[arg(long)]
    manifest: PathBuf,
    /// Output model file
    #[arg(long)]
    out: PathBuf,
    /// Embedding dimensionality (must be a perfect cube for the
    /// built-in histogram extractor)
    #[arg(long, default_value_t = cloudpose_recognition::EMBEDDING_DIM)]
    dim: usize,
    /// Directory of precomputed <frame_id>_<index>.emb files
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 500)]
    max_epochs: usize,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Model database directory
    #[arg(long)]
    db: PathBuf,
    /// Trained classifier file
    #[arg(long)]
    model: PathBuf,
    /// Report output path
    #[arg(long)]
    out: PathBuf,
    /// Also write the PRC points as CSV here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads; 0 means one per core
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Report or bare record-array JSON to score
    #[arg(long)]
    records: PathBuf,
    /// Dataset manifest supplying ground-truth counts
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Surface sampling density per axis
    #[arg(long, default_value_t = 70)]
    grid: usize,
    /// Target-cloud jitter in millimeters
    #[arg(long, default_value_t = 2.0)]
    noise_mm: f64,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Output dataset directory
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    instances: usize,
    #[arg(long, default_value_t = 4)]
    views: usize,
    #[arg(long, default_value_t = 6)]
    frames: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::BuildDb(args) => build_db(args),
        Command::Train(args) => train(args),
        Command::Run(args) => run(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Bench(args) => bench(args),
        Command::Synth(args) => synth_cmd(args),
    }
}

fn build_db(args: BuildDbArgs) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let (db, outcome) = build_database(&args.views, &cfg)?;
    for (path, reason) in &outcome.skipped {
        eprintln!("skipped {}: {reason}", path.display());
    }
    db.save(&args.out)?;
    println!(
        "database: {} instances, {} views -> {}",
        outcome.instances,
        outcome.views,
        args.out.display()
    );
    Ok(())
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let manifest = load_dataset_manifest(&args.manifest)?;
    let params = TrainParams {
        l2: args.l2,
        max_epochs: args.max_epochs,
        ..TrainParams::default()
    };
    let (model, report) = train_from_manifest(&manifest, args.dim, args.embeddings.as_deref(), &params)?;
    model.save(&args.out)?;
    println!(
        "model: {} classes, dim {}, {} epochs, final loss {:.6} -> {}",
        model.class_labels().len(),
        model.dim(),
        report.epochs,
        report.losses.last().copied().unwrap_or(f64::NAN),
        args.out.display()
    );
    Ok(())
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let manifest = load_dataset_manifest(&args.manifest)?;
    let db = ModelDatabase::load(&args.db)?;
    let model = LogisticModel::load(&args.model)?;
    let report = run_dataset(&manifest, &db, &model, &cfg, args.threads, None)?;
    write_report(&report, &args.out)?;
    if let Some(csv) = &args.csv {
        if let Some(prc) = &report.prc {
            std::fs::write(csv, prc.to_csv())?;
            println!("prc csv: {}", csv.display());
        }
    }
    let true_positives = report.records.iter().filter(|r| r.is_true_positive).count();
    println!(
        "report: {} records, {} true positives, auc {} -> {}",
        report.records.len(),
        true_positives,
        report
            .prc
            .as_ref()
            .map_or("n/a".to_string(), |c| format!("{:.4}", c.auc)),
        args.out.display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let manifest = load_dataset_manifest(&args.manifest)?;
    let records = load_records(&args.records)?;
    let gt_counts: Vec<usize> = manifest.frames.iter().map(|f| f.annotations.len()).collect();
    let report = pipeline::report_from_records(&cfg, records, &gt_counts)?;
    write_report(&report, &args.out)?;
    if let Some(csv) = &args.csv {
        if let Some(prc) = &report.prc {
            std::fs::write(csv, prc.to_csv())?;
        }
    }
    println!(
        "evaluation: {} records, auc {} -> {}",
        report.records.len(),
        report
            .prc
            .as_ref()
            .map_or("n/a".to_string(), |c| format!("{:.4}", c.auc)),
        args.out.display()
    );
    Ok(())
}

/// Times both coarse methods on the same randomly generated scenes and
/// prints a small comparison table.
fn bench(args: BenchArgs) -> anyhow::Result<()> {
    use cloudpose_core::Vec3;

    let cfg = args.config.resolve()?;
    let sigma = args.noise_mm / 1000.0;
    let mut rows: Vec<(&str, f64, Vec<f64>)> = vec![("ransac", 0.0, vec![]), ("fgr", 0.0, vec![])];

    for seed in 0..args.seeds {
        let mut rng = rand::SeedableRng::seed_from_u64(seed.wrapping_mul(0x5bd1e995));
        let lift = cloudpose_core::RigidTransform::identity()
            .with_translation(Vec3::new(0.0, 0.0, 1.0));
        let source = synth::random_surface_cloud(seed, args.grid).transformed(&lift);
        let motion = synth::random_pose(&mut rng, 30f64.to_radians(), 0.2);
        let target = synth::add_noise(&source.transformed(&motion), sigma, &mut rng);

        let (src, src_f) = pipeline::prepare_cloud(&source, &cfg)?;
        let (tgt, tgt_f) = pipeline::prepare_cloud(&target, &cfg)?;

        for (method, total, ratios) in &mut rows {
            let coarse = match *method {
                "ransac" => CoarseConfig::Ransac(cloudpose_core::RansacParams {
                    seed,
                    ..match cfg.coarse_config(seed) {
                        CoarseConfig::Ransac(p) => p,
                        _ => cloudpose_core::RansacParams::default(),
                    }
                }),
                _ => CoarseConfig::Fgr(cloudpose_core::FgrParams {
                    seed,
                    ..Default::default()
                }),
            };
            let started = Instant::now();
            let result = coarse.register(&src, &tgt, &src_f, &tgt_f)?;
            *total += started.elapsed().as_secs_f64();
            ratios.push(result.inlier_ratio);
        }
    }

    println!("method  mean_coarse_s  median_inlier_ratio");
    for (method, total, mut ratios) in rows {
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = ratios[ratios.len() / 2];
        println!(
            "{method:<7} {:<14.4} {median:.4}",
            total / args.seeds as f64
        );
    }
    Ok(())
}

fn synth_cmd(args: SynthArgs) -> anyhow::Result<()> {
    let params = SynthParams {
        instances: args.instances,
        views_per_instance: args.views,
        frames: args.frames,
        seed: args.seed,
        ..SynthParams::default()
    };
    let manifest = synth::write_synthetic_dataset(&args.out, &params)?;
    println!("dataset: {}", manifest.display());
    Ok(())
}
