//! Randomized invariant checks: file round-trips, closed-form pose
//! recovery, and voxel stability under arbitrary inputs.

use std::io::Cursor;

use cloudpose_core::ply::{read_ply_from, write_ply_to, PlyFormat};
use cloudpose_core::{estimate_rigid, voxel_downsample, PointCloud, RigidTransform, Vec3};
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct CloudSpec {
    points: Vec<[f32; 3]>,
    normals: Option<Vec<[f32; 3]>>,
    colors: Option<Vec<[u8; 3]>>,
}

fn cloud_spec() -> impl Strategy<Value = CloudSpec> {
    let row = (
        prop::array::uniform3(-100.0f32..100.0),
        prop::array::uniform3(-1.0f32..1.0),
        prop::array::uniform3(0u8..=255),
    );
    (prop::collection::vec(row, 0..40), any::<bool>(), any::<bool>()).prop_map(
        |(rows, with_normals, with_colors)| {
            let points = rows.iter().map(|r| r.0).collect();
            let normals = with_normals.then(|| {
                rows.iter()
                    .map(|r| {
                        let [x, y, z] = r.1;
                        let norm = (x * x + y * y + z * z).sqrt();
                        // Short vectors become the explicit "no normal" flag,
                        // so both branches of the format get exercised.
                        if norm < 0.3 {
                            [0.0, 0.0, 0.0]
                        } else {
                            [x / norm, y / norm, z / norm]
                        }
                    })
                    .collect()
            });
            let colors = with_colors.then(|| rows.iter().map(|r| r.2).collect());
            CloudSpec {
                points,
                normals,
                colors,
            }
        },
    )
}

fn build_cloud(spec: &CloudSpec) -> PointCloud<f64> {
    let pts = spec
        .points
        .iter()
        .map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64))
        .collect();
    let mut cloud = PointCloud::from_points(pts).unwrap();
    if let Some(ns) = &spec.normals {
        cloud
            .set_normals(
                ns.iter()
                    .map(|n| Vec3::new(n[0] as f64, n[1] as f64, n[2] as f64))
                    .collect(),
            )
            .unwrap();
    }
    if let Some(cs) = &spec.colors {
        cloud
            .set_colors(
                cs.iter()
                    .map(|c| {
                        Vec3::new(c[0] as f64 / 255.0, c[1] as f64 / 255.0, c[2] as f64 / 255.0)
                    })
                    .collect(),
            )
            .unwrap();
    }
    cloud
}

/// Random transforms with rotations anywhere on the sphere and translations
/// up to a few meters.
fn transform_strategy() -> impl Strategy<Value = RigidTransform<f64>> {
    (
        prop::array::uniform3(-1.0f64..1.0),
        -3.1f64..3.1,
        prop::array::uniform3(-5.0f64..5.0),
    )
        .prop_map(|(axis, angle, t)| {
            let axis = Vec3::new(axis[0] + 0.01, axis[1], axis[2]);
            RigidTransform::rotation_axis_angle(axis, angle)
                .with_translation(Vec3::new(t[0], t[1], t[2]))
        })
}

/// Entrywise agreement of two transforms. Robust down to machine epsilon,
/// unlike the acos-based angle, whose error floor sits near 3e-8.
fn transforms_agree(a: &RigidTransform<f64>, b: &RigidTransform<f64>, tol: f64) -> bool {
    let mut worst = (a.translation - b.translation).norm();
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((a.rotation.m[i][j] - b.rotation.m[i][j]).abs());
        }
    }
    worst < tol
}

/// Random well-spread source points: anchors guarantee the set is never
/// collinear no matter how the random part shrinks.
fn spread_points_strategy() -> impl Strategy<Value = Vec<Vec3<f64>>> {
    prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 0..12).prop_map(|extra| {
        let mut pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::new(0.0, 0.5, 0.0),
            Vec3::new(0.0, 0.0, 0.5),
        ];
        pts.extend(extra.iter().map(|p| Vec3::new(p[0], p[1], p[2])));
        pts
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ply_round_trip_is_stable(spec in cloud_spec()) {
        let cloud = build_cloud(&spec);
        for format in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            let mut first = Vec::new();
            write_ply_to(&cloud, &mut first, format).unwrap();
            let back: PointCloud<f64> = read_ply_from(&mut Cursor::new(&first)).unwrap();
            prop_assert_eq!(&back, &cloud);
            let mut second = Vec::new();
            write_ply_to(&back, &mut second, format).unwrap();
            prop_assert_eq!(&first, &second);
        }
    }

    #[test]
    fn rigid_estimate_recovers_any_transform(
        pts in spread_points_strategy(),
        truth in transform_strategy(),
    ) {
        let moved: Vec<Vec3<f64>> = pts.iter().map(|p| truth.apply(p)).collect();
        let est = estimate_rigid(&pts, &moved).unwrap();
        prop_assert!(transforms_agree(&est, &truth, 1e-9));
    }

    #[test]
    fn rigid_estimate_is_equivariant(
        pts in spread_points_strategy(),
        truth in transform_strategy(),
        pre in transform_strategy(),
    ) {
        let moved: Vec<Vec3<f64>> = pts.iter().map(|p| truth.apply(p)).collect();
        let base = estimate_rigid(&pts, &moved).unwrap();
        let shifted_src: Vec<Vec3<f64>> = pts.iter().map(|p| pre.apply(p)).collect();
        let alt = estimate_rigid(&shifted_src, &moved).unwrap();
        let recombined = alt.compose(&pre);
        prop_assert!(transforms_agree(&base, &recombined, 1e-9));
    }

    #[test]
    fn voxel_downsample_is_stable_on_its_own_output(
        spec in cloud_spec(),
        leaf in 0.05f64..2.0,
    ) {
        let cloud = build_cloud(&spec);
        let once = voxel_downsample(&cloud, leaf).unwrap();
        let twice = voxel_downsample(&once, leaf).unwrap();
        let mut a: Vec<[u64; 3]> = once.points().iter().map(|p| [
            p.x.to_bits(), p.y.to_bits(), p.z.to_bits(),
        ]).collect();
        let mut b: Vec<[u64; 3]> = twice.points().iter().map(|p| [
            p.x.to_bits(), p.y.to_bits(), p.z.to_bits(),
        ]).collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }
}
