//! Disk round trips for the view database: loading back what was saved must
//! reproduce it exactly, and re-saving must reproduce the same bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cloudpose_core::{
    compute_fpfh, estimate_normals, voxel_downsample, PointCloud, RigidTransform, Vec3,
};
use cloudpose_recognition::{BuildParams, Error, ModelDatabase, ObjectView};

const LEAF: f64 = 0.01;
const NORMAL_RADIUS: f64 = 0.03;
const FPFH_RADIUS: f64 = 0.05;

/// Small curved patch; `bump` and `tilt` vary the shape per view.
fn surface(bump: f64, tilt: f64) -> PointCloud<f64> {
    let mut pts = Vec::new();
    let n = 24;
    for i in 0..=n {
        for j in 0..=n {
            let x = -0.1 + 0.2 * i as f64 / n as f64;
            let y = -0.1 + 0.2 * j as f64 / n as f64;
            let z = bump * (17.0 * x).sin() * (15.0 * y).cos() + tilt * (x + 2.0 * y);
            pts.push(Vec3::new(x, y, z));
        }
    }
    PointCloud::from_points(pts).unwrap()
}

fn processed_view(label: &str, id: u32, bump: f64, tilt: f64) -> ObjectView {
    let raw = surface(bump, tilt);
    let down = voxel_downsample(&raw, LEAF).unwrap();
    let cloud = estimate_normals(&down, NORMAL_RADIUS, Vec3::new(0.0, 0.0, 10.0)).unwrap();
    let keypoints: Vec<usize> = (0..cloud.len()).collect();
    let features = compute_fpfh(&cloud, &keypoints, FPFH_RADIUS).unwrap();
    let hint = (id % 2 == 0).then(|| {
        RigidTransform::rotation_axis_angle(Vec3::new(0.0, 0.0, 1.0), 0.1 * id as f64)
            .with_translation(Vec3::new(0.01 * id as f64, -0.02, 0.3))
    });
    ObjectView::new(label.to_string(), id, cloud, features, hint).unwrap()
}

fn sample_database() -> ModelDatabase {
    let mut db = ModelDatabase::new(BuildParams {
        leaf_m: LEAF,
        fpfh_radius_m: FPFH_RADIUS,
    })
    .unwrap();
    db.add_view(processed_view("bowl", 0, 0.030, 0.00)).unwrap();
    db.add_view(processed_view("bowl", 1, 0.028, 0.05)).unwrap();
    db.add_view(processed_view("bowl", 2, 0.026, -0.04)).unwrap();
    db.add_view(processed_view("mug", 0, 0.015, 0.12)).unwrap();
    db.add_view(processed_view("mug", 5, 0.017, -0.09)).unwrap();
    db
}

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn load_reproduces_the_saved_database() {
    let dir = tempfile::tempdir().unwrap();
    let db = sample_database();
    db.save(dir.path()).unwrap();

    let loaded = ModelDatabase::load(dir.path()).unwrap();
    assert_eq!(loaded.instance_count(), 2);
    assert_eq!(loaded.view_count(), 5);
    let labels: Vec<&str> = loaded.labels().collect();
    assert_eq!(labels, ["bowl", "mug"]);
    assert_eq!(loaded.params(), db.params());

    for label in ["bowl", "mug"] {
        for (orig, back) in db.views(label).unwrap().iter().zip(loaded.views(label).unwrap()) {
            assert_eq!(back.view_id(), orig.view_id());
            // Descriptors and pose hints survive exactly; point storage is
            // single precision on disk, so coordinates come back rounded.
            assert_eq!(back.features(), orig.features());
            assert_eq!(back.pose_hint(), orig.pose_hint());
            assert_eq!(back.cloud().len(), orig.cloud().len());
            for (p, q) in orig.cloud().points().iter().zip(back.cloud().points()) {
                assert!(p.distance(q) < 1e-6);
            }
        }
    }
}

#[test]
fn resaving_writes_identical_bytes() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let db = sample_database();
    db.save(first.path()).unwrap();

    let loaded = ModelDatabase::load(first.path()).unwrap();
    loaded.save(second.path()).unwrap();

    let a = tree_bytes(first.path());
    let b = tree_bytes(second.path());
    assert_eq!(
        a.keys().collect::<Vec<_>>(),
        b.keys().collect::<Vec<_>>(),
        "file sets differ"
    );
    for (name, bytes) in &a {
        assert_eq!(bytes, &b[name], "content of {name} differs");
    }

    let reloaded = ModelDatabase::load(second.path()).unwrap();
    assert_eq!(reloaded, loaded);
}

#[test]
fn a_broken_manifest_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let db = sample_database();
    db.save(dir.path()).unwrap();

    fs::write(dir.path().join("manifest.json"), b"{ not json").unwrap();
    assert!(matches!(
        ModelDatabase::load(dir.path()),
        Err(Error::Manifest(_))
    ));
}

#[test]
fn a_missing_view_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let db = sample_database();
    db.save(dir.path()).unwrap();

    fs::remove_file(dir.path().join("mug/view_0005.ply")).unwrap();
    assert!(matches!(
        ModelDatabase::load(dir.path()),
        Err(Error::Io(_) | Error::Core(_))
    ));
}

#[test]
fn an_empty_database_refuses_to_save() {
    let dir = tempfile::tempdir().unwrap();
    let db = ModelDatabase::new(BuildParams {
        leaf_m: LEAF,
        fpfh_radius_m: FPFH_RADIUS,
    })
    .unwrap();
    assert!(db.save(dir.path()).is_err());
}
