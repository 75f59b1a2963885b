//! View sampling and best-view search against synthetic scene crops.

use cloudpose_core::{
    compute_fpfh, estimate_normals, FeatureSet, PointCloud, RansacParams, Vec3,
};
use cloudpose_recognition::{
    select_best_view, select_views, BuildParams, CoarseConfig, Error, FgrParams, ModelDatabase,
    ObjectView,
};

/// Curved patch with normals; `scale` multiplies every coordinate, and the
/// processing radii scale with it so descriptors stay meaningful.
fn patch(step: f64, scale: f64) -> PointCloud<f64> {
    let mut pts = Vec::new();
    let n = (0.2 / step).round() as i32;
    for i in 0..=n {
        for j in 0..=n {
            let x = -0.1 + step * i as f64;
            let y = -0.1 + step * j as f64;
            let z = 0.03 * (20.0 * x).sin() * (20.0 * y).cos()
                + 0.01 * (7.0 * x + 13.0 * y + 0.5).sin();
            pts.push(Vec3::new(x, y, z) * scale);
        }
    }
    let cloud = PointCloud::from_points(pts).unwrap();
    estimate_normals(&cloud, 0.03 * scale, Vec3::new(0.0, 0.0, 10.0 * scale)).unwrap()
}

fn features_at(cloud: &PointCloud<f64>, scale: f64) -> FeatureSet {
    let keypoints: Vec<usize> = (0..cloud.len()).collect();
    compute_fpfh(cloud, &keypoints, 0.05 * scale).unwrap()
}

fn view_of(cloud: PointCloud<f64>, label: &str, id: u32, scale: f64) -> ObjectView {
    let features = features_at(&cloud, scale);
    ObjectView::new(label.to_string(), id, cloud, features, None).unwrap()
}

fn ransac_config(seed: u64) -> CoarseConfig {
    CoarseConfig::Ransac(RansacParams {
        seed,
        ..RansacParams::default()
    })
}

fn tiny_db(view_ids: &[u32]) -> ModelDatabase {
    let mut db = ModelDatabase::new(BuildParams {
        leaf_m: 0.01,
        fpfh_radius_m: 0.05,
    })
    .unwrap();
    for &id in view_ids {
        db.add_view(view_of(patch(0.04, 1.0), "thing", id, 1.0))
            .unwrap();
    }
    db
}

#[test]
fn sampling_is_deterministic_and_without_replacement() {
    let db = tiny_db(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]);
    let a: Vec<u32> = select_views(&db, "thing", 5, 9)
        .unwrap()
        .iter()
        .map(|v| v.view_id())
        .collect();
    let b: Vec<u32> = select_views(&db, "thing", 5, 9)
        .unwrap()
        .iter()
        .map(|v| v.view_id())
        .collect();
    assert_eq!(a, b);
    assert_eq!(a.len(), 5);
    let mut unique = a.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), 5, "a view was drawn twice: {a:?}");
}

#[test]
fn asking_for_more_views_than_stored_returns_all_in_order() {
    let db = tiny_db(&[4, 1, 7]);
    let ids: Vec<u32> = select_views(&db, "thing", 10, 0)
        .unwrap()
        .iter()
        .map(|v| v.view_id())
        .collect();
    assert_eq!(ids, vec![1, 4, 7]);
}

#[test]
fn sampling_an_unknown_instance_fails() {
    let db = tiny_db(&[0]);
    assert!(matches!(
        select_views(&db, "ghost", 3, 0),
        Err(Error::UnknownInstance(_))
    ));
}

#[test]
fn an_exact_copy_beats_a_decimated_one() {
    let scene = patch(0.01, 1.0);
    let scene_features = features_at(&scene, 1.0);

    let exact = view_of(scene.clone(), "thing", 3, 1.0);
    let decimated_indices: Vec<usize> = (0..scene.len()).step_by(3).collect();
    let decimated = view_of(scene.select(&decimated_indices).unwrap(), "thing", 8, 1.0);

    let views = [&decimated, &exact];
    let (best, result) =
        select_best_view(&scene, &scene_features, &views, &ransac_config(5), 3).unwrap();

    assert_eq!(best.view_id(), 3, "the exact copy must win");
    assert!(
        result.inlier_ratio >= 0.99,
        "self match should cover the scene, got {}",
        result.inlier_ratio
    );
    assert!(result.inlier_count >= 3);
}

#[test]
fn the_search_is_deterministic_for_a_seed() {
    let scene = patch(0.015, 1.0);
    let scene_features = features_at(&scene, 1.0);
    let a_view = view_of(scene.clone(), "thing", 1, 1.0);
    let keep: Vec<usize> = (0..scene.len()).step_by(2).collect();
    let b_view = view_of(scene.select(&keep).unwrap(), "thing", 2, 1.0);
    let views = [&a_view, &b_view];

    let (v1, r1) = select_best_view(&scene, &scene_features, &views, &ransac_config(7), 3).unwrap();
    let (v2, r2) = select_best_view(&scene, &scene_features, &views, &ransac_config(7), 3).unwrap();
    assert_eq!(v1.view_id(), v2.view_id());
    assert_eq!(r1.transform, r2.transform);
    assert_eq!(r1.inlier_count, r2.inlier_count);
    assert_eq!(r1.correspondence_set, r2.correspondence_set);
}

/// A candidate whose geometry is two orders of magnitude larger can match
/// descriptors but never forms three geometrically consistent pairs, so the
/// search must report that nothing fits rather than return a junk pose.
#[test]
fn a_wildly_mismatched_candidate_yields_no_match() {
    let scene = patch(0.02, 1.0);
    let scene_features = features_at(&scene, 1.0);
    let giant = view_of(patch(0.02, 100.0), "giant", 0, 100.0);
    let views = [&giant];

    let ransac = CoarseConfig::Ransac(RansacParams {
        max_iterations: 100_000,
        seed: 11,
        ..RansacParams::default()
    });
    assert!(matches!(
        select_best_view(&scene, &scene_features, &views, &ransac, 3),
        Err(Error::NoMatch)
    ));

    let fgr = CoarseConfig::Fgr(FgrParams {
        seed: 11,
        ..FgrParams::default()
    });
    assert!(matches!(
        select_best_view(&scene, &scene_features, &views, &fgr, 3),
        Err(Error::NoMatch)
    ));
}

#[test]
fn an_empty_candidate_list_is_an_error() {
    let scene = patch(0.04, 1.0);
    let scene_features = features_at(&scene, 1.0);
    assert!(matches!(
        select_best_view(&scene, &scene_features, &[], &ransac_config(0), 3),
        Err(Error::InvalidParameter(_))
    ));
}
