//! Deterministic synthetic data: parametric object surfaces, rendered
//! RGB-D frames, and a full on-disk dataset (views, images, manifest)
//! for exercising the pipeline without sensor recordings.

use std::fs;
use std::path::{Path, PathBuf};

use cloudpose_core::{write_ply, PlyFormat, PointCloud, RigidTransform, Vec3};
use cloudpose_ingestion::{save_depth_png, BBox2d, CameraIntrinsics, DepthMap};
use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Distinct base colors so instance crops produce separable color
/// histograms. Indexed modulo the palette size.
const PALETTE: [[u8; 3]; 6] = [
    [220, 60, 40],
    [40, 200, 60],
    [60, 80, 220],
    [200, 180, 40],
    [180, 60, 200],
    [40, 200, 200],
];

const BACKGROUND: [u8; 3] = [10, 10, 12];

/// Object half-extent in meters; surfaces span a 22 cm square patch.
const HALF_EXTENT: f64 = 0.11;

#[derive(Clone, Copy, Debug)]
pub struct SynthParams {
    pub instances: usize,
    pub views_per_instance: usize,
    pub frames: usize,
    pub seed: u64,
    /// Samples per surface axis when writing database views.
    pub view_grid: usize,
    /// Samples per surface axis when rendering scene frames; denser so
    /// the depth image has few holes.
    pub scene_grid: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            instances: 3,
            views_per_instance: 4,
            frames: 6,
            seed: 7,
            view_grid: 60,
            scene_grid: 150,
        }
    }
}

pub fn instance_label(instance: usize) -> String {
    format!("object_{instance:02}")
}

/// Smooth instance-specific heightfield: a few sinusoids whose
/// frequencies and phases are drawn from the instance index, giving
/// every object its own curvature signature.
fn surface_height(instance: usize, base_seed: u64, x: f64, y: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed ^ (instance as u64).wrapping_mul(0x51ed));
    let mut z = 0.0;
    for _ in 0..3 {
        let amp = rng.gen_range(0.008..0.02);
        let wx = rng.gen_range(8.0..28.0);
        let wy = rng.gen_range(8.0..28.0);
        let px = rng.gen_range(0.0..std::f64::consts::TAU);
        let py = rng.gen_range(0.0..std::f64::consts::TAU);
        z += amp * (wx * x + px).sin() * (wy * y + py).cos();
    }
    z
}

/// Surface cloud of one instance in its model frame, centered at the
/// origin.
pub fn object_cloud(instance: usize, base_seed: u64, grid: usize) -> PointCloud<f64> {
    let mut points = Vec::with_capacity(grid * grid);
    for iy in 0..grid {
        for ix in 0..grid {
            let x = -HALF_EXTENT + 2.0 * HALF_EXTENT * ix as f64 / (grid - 1) as f64;
            let y = -HALF_EXTENT + 2.0 * HALF_EXTENT * iy as f64 / (grid - 1) as f64;
            points.push(Vec3::new(x, y, surface_height(instance, base_seed, x, y)));
        }
    }
    PointCloud::from_points(points).expect("grid surface is finite and non-empty")
}

/// Uniform random unit vector by rejection from the cube.
pub fn random_axis(rng: &mut ChaCha8Rng) -> Vec3<f64> {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

/// Random rigid motion with rotation angle at most `max_angle` radians
/// and translation norm at most `max_trans`.
pub fn random_pose(rng: &mut ChaCha8Rng, max_angle: f64, max_trans: f64) -> RigidTransform<f64> {
    let axis = random_axis(rng);
    let angle = rng.gen_range(0.0..max_angle);
    let t = random_axis(rng) * rng.gen_range(0.0..max_trans);
    RigidTransform::rotation_axis_angle(axis, angle).with_translation(t)
}

/// Adds isotropic Gaussian jitter to every point.
pub fn add_noise(cloud: &PointCloud<f64>, sigma: f64, rng: &mut ChaCha8Rng) -> PointCloud<f64> {
    let mut gauss = move || {
        // Box-Muller from two open-interval uniforms.
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u1.ln()).sqrt() * u2.cos()
    };
    let points = cloud
        .points()
        .iter()
        .map(|p| *p + Vec3::new(gauss() * sigma, gauss() * sigma, gauss() * sigma))
        .collect();
    PointCloud::from_points(points).expect("jittered points stay finite")
}

/// Pose a stored view was captured from: a modest deterministic tilt,
/// standing 0.9 m in front of the camera.
pub fn view_pose(instance: usize, view: usize, base_seed: u64) -> RigidTransform<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(
        base_seed ^ ((instance as u64) << 32 | view as u64).wrapping_mul(0x9e37),
    );
    let axis = random_axis(&mut rng);
    let angle = rng.gen_range(0.0..0.5);
    RigidTransform::rotation_axis_angle(axis, angle).with_translation(Vec3::new(0.0, 0.0, 0.9))
}

/// An object placed in the camera frame of a scene.
#[derive(Clone, Debug)]
pub struct PlacedObject {
    pub instance: usize,
    pub pose: RigidTransform<f64>,
}

pub struct RenderedFrame {
    pub depth: DepthMap,
    pub rgb: RgbImage,
    /// Visible instances with their pixel bounding boxes.
    pub bboxes: Vec<(usize, BBox2d)>,
}

fn instance_color(instance: usize, u: u32, v: u32) -> [u8; 3] {
    let base = PALETTE[instance % PALETTE.len()];
    // Checker modulation gives the histogram a second mode per object.
    let scale = if (u / 6 + v / 6) % 2 == 0 { 1.0 } else { 0.72 };
    [
        (base[0] as f64 * scale) as u8,
        (base[1] as f64 * scale) as u8,
        (base[2] as f64 * scale) as u8,
    ]
}

/// Splats posed object surfaces into a z-buffered depth image and paints
/// their pixels; depth is stored in millimeters like a sensor would.
pub fn render_scene(
    objects: &[PlacedObject],
    base_seed: u64,
    grid: usize,
    k: &CameraIntrinsics,
) -> Result<RenderedFrame> {
    let (w, h) = (k.width as usize, k.height as usize);
    let mut z_buf = vec![f64::INFINITY; w * h];
    let mut owner = vec![usize::MAX; w * h];

    for placed in objects {
        let cloud = object_cloud(placed.instance, base_seed, grid);
        for p in cloud.points() {
            let q = placed.pose.apply(p);
            if q.z <= 0.0 {
                continue;
            }
            let u = (q.x / q.z * k.fx + k.cx).round();
            let v = (q.y / q.z * k.fy + k.cy).round();
            if u < 0.0 || v < 0.0 || u >= k.width as f64 || v >= k.height as f64 {
                continue;
            }
            let idx = v as usize * w + u as usize;
            if q.z < z_buf[idx] {
                z_buf[idx] = q.z;
                owner[idx] = placed.instance;
            }
        }
    }

    let mut depth = vec![0u16; w * h];
    let mut rgb = RgbImage::new(k.width, k.height);
    for v in 0..h {
        for u in 0..w {
            let idx = v * w + u;
            let color = if owner[idx] == usize::MAX {
                BACKGROUND
            } else {
                let mm = (z_buf[idx] * k.depth_scale).round();
                depth[idx] = mm.clamp(1.0, u16::MAX as f64) as u16;
                instance_color(owner[idx], u as u32, v as u32)
            };
            rgb.put_pixel(u as u32, v as u32, image::Rgb(color));
        }
    }

    let mut bboxes = Vec::new();
    for placed in objects {
        let mut min = (u32::MAX, u32::MAX);
        let mut max = (0u32, 0u32);
        let mut seen = false;
        for v in 0..h {
            for u in 0..w {
                if owner[v * w + u] == placed.instance {
                    seen = true;
                    min = (min.0.min(u as u32), min.1.min(v as u32));
                    max = (max.0.max(u as u32), max.1.max(v as u32));
                }
            }
        }
        if seen {
            let bbox = BBox2d::new(
                min.0 as i32,
                min.1 as i32,
                (max.0 - min.0 + 1) as i32,
                (max.1 - min.1 + 1) as i32,
            )
            .map_err(Error::Ingest)?;
            bboxes.push((placed.instance, bbox));
        }
    }

    Ok(RenderedFrame {
        depth: DepthMap::new(k.width, k.height, depth).map_err(Error::Ingest)?,
        rgb,
        bboxes,
    })
}

#[derive(Serialize)]
struct ManifestAnnotation {
    label: String,
    bbox: BBox2d,
}

#[derive(Serialize)]
struct ManifestFrame {
    id: String,
    rgb: String,
    depth: String,
    annotations: Vec<ManifestAnnotation>,
}

#[derive(Serialize)]
struct ManifestRoot {
    intrinsics: CameraIntrinsics,
    frames: Vec<ManifestFrame>,
}

/// Writes a complete synthetic dataset: per-instance view clouds under
/// `views/`, rendered frames under `frames/`, and `dataset.json` tying
/// them together. Returns the manifest path.
pub fn write_synthetic_dataset(dir: &Path, params: &SynthParams) -> Result<PathBuf> {
    if params.instances == 0 || params.frames == 0 || params.views_per_instance == 0 {
        return Err(Error::InvalidConfig(
            "synthetic dataset needs at least one instance, view and frame".into(),
        ));
    }
    let k = CameraIntrinsics::default();
    let views_dir = dir.join("views");
    let frames_dir = dir.join("frames");
    fs::create_dir_all(&frames_dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xdada_5eed);
    for instance in 0..params.instances {
        let label_dir = views_dir.join(instance_label(instance));
        fs::create_dir_all(&label_dir)?;
        for view in 0..params.views_per_instance {
            let cloud = object_cloud(instance, params.seed, params.view_grid);
            let posed = cloud.transformed(&view_pose(instance, view, params.seed));
            let jittered = add_noise(&posed, 3e-4, &mut rng);
            write_ply(
                &jittered,
                &label_dir.join(format!("view_{view:02}.ply")),
                PlyFormat::BinaryLittleEndian,
            )?;
        }
    }

    let mut frames = Vec::new();
    for frame in 0..params.frames {
        let mut objects = Vec::new();
        let slots = 1 + frame % 2;
        for slot in 0..slots {
            let instance = (frame + slot) % params.instances;
            let offset = if slots == 1 {
                0.0
            } else if slot == 0 {
                -0.18
            } else {
                0.18
            };
            let tilt = RigidTransform::rotation_axis_angle(
                random_axis(&mut rng),
                rng.gen_range(0.0..0.5),
            )
            .with_translation(Vec3::new(
                offset + rng.gen_range(-0.02..0.02),
                rng.gen_range(-0.05..0.05),
                rng.gen_range(0.95..1.15),
            ));
            objects.push(PlacedObject {
                instance,
                pose: tilt,
            });
        }
        let rendered = render_scene(&objects, params.seed, params.scene_grid, &k)?;
        let id = format!("frame_{frame:03}");
        let depth_name = format!("frames/{id}_depth.png");
        let rgb_name = format!("frames/{id}_rgb.png");
        save_depth_png(&rendered.depth, &dir.join(&depth_name)).map_err(Error::Ingest)?;
        rendered
            .rgb
            .save(dir.join(&rgb_name))
            .map_err(|e| Error::Ingest(cloudpose_ingestion::Error::Image(e)))?;
        frames.push(ManifestFrame {
            id,
            rgb: rgb_name,
            depth: depth_name,
            annotations: rendered
                .bboxes
                .iter()
                .map(|(instance, bbox)| ManifestAnnotation {
                    label: instance_label(*instance),
                    bbox: *bbox,
                })
                .collect(),
        });
    }

    let manifest = ManifestRoot {
        intrinsics: k,
        frames,
    };
    let path = dir.join("dataset.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Random smooth surface for registration benchmarks: like the instance
/// surfaces but with fully seeded coefficients and a larger footprint.
pub fn random_surface_cloud(seed: u64, grid: usize) -> PointCloud<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.15;
    let coeffs: Vec<(f64, f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(0.005..0.02),
                rng.gen_range(6.0..25.0),
                rng.gen_range(6.0..25.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let mut points = Vec::with_capacity(grid * grid);
    for iy in 0..grid {
        for ix in 0..grid {
            let x = -half + 2.0 * half * ix as f64 / (grid - 1) as f64;
            let y = -half + 2.0 * half * iy as f64 / (grid - 1) as f64;
            let z: f64 = coeffs
                .iter()
                .map(|(a, wx, wy, px, py)| a * (wx * x + px).sin() * (wy * y + py).cos())
                .sum();
            points.push(Vec3::new(x, y, z));
        }
    }
    PointCloud::from_points(points).expect("surface points are finite")
}
