//! Voxel-grid downsampling.

use std::collections::HashMap;

use crate::{Error, PointCloud, Real, Result, Vec3};

struct Accum<R> {
    count: usize,
    pos: Vec3<R>,
    normal: Vec3<R>,
    normal_count: usize,
    color: Vec3<R>,
}

/// Collapse every occupied voxel of an absolute grid with cell size
/// `leaf` to the centroid of its points.
///
/// The cell key is `floor(coord / leaf)` per axis, so cell `i` covers
/// `[i*leaf, (i+1)*leaf)` and a point exactly on a boundary lands in the
/// higher cell. Valid normals are averaged and renormalized (all-invalid
/// or cancelling normals leave the invalid flag); colors are averaged and
/// clamped. Output order is by ascending cell key, which makes the result
/// a pure function of the input.
pub fn voxel_downsample<R: Real>(cloud: &PointCloud<R>, leaf: R) -> Result<PointCloud<R>> {
    if !(leaf.is_finite() && leaf > R::zero()) {
        return Err(Error::InvalidParameter(
            "leaf size must be finite and positive".into(),
        ));
    }
    if cloud.is_empty() {
        return Ok(PointCloud::new());
    }

    let key_of = |p: &Vec3<R>| -> Result<(i64, i64, i64)> {
        let k = |c: R| -> Result<i64> {
            (c / leaf)
                .floor()
                .to_i64()
                .ok_or_else(|| Error::InvalidParameter("voxel key overflows".into()))
        };
        Ok((k(p.x)?, k(p.y)?, k(p.z)?))
    };

    let mut cells: HashMap<(i64, i64, i64), Accum<R>> = HashMap::new();
    for (i, p) in cloud.points().iter().enumerate() {
        let acc = cells.entry(key_of(p)?).or_insert_with(|| Accum {
            count: 0,
            pos: Vec3::zeros(),
            normal: Vec3::zeros(),
            normal_count: 0,
            color: Vec3::zeros(),
        });
        acc.count += 1;
        acc.pos += *p;
        if cloud.normal_is_valid(i) {
            acc.normal += cloud.normals().unwrap()[i];
            acc.normal_count += 1;
        }
        if let Some(cs) = cloud.colors() {
            acc.color += cs[i];
        }
    }

    let mut keys: Vec<(i64, i64, i64)> = cells.keys().copied().collect();
    keys.sort_unstable();

    let mut points = Vec::with_capacity(keys.len());
    let mut normals = Vec::with_capacity(keys.len());
    let mut colors = Vec::with_capacity(keys.len());
    for key in keys {
        let acc = &cells[&key];
        let n = R::from_usize(acc.count).unwrap();
        points.push(acc.pos / n);
        if cloud.has_normals() {
            let avg = if acc.normal_count > 0 {
                acc.normal / R::from_usize(acc.normal_count).unwrap()
            } else {
                Vec3::zeros()
            };
            normals.push(avg.normalized().unwrap_or(Vec3::zeros()));
        }
        if cloud.has_colors() {
            let avg = acc.color / n;
            colors.push(Vec3::new(
                avg.x.min(R::one()).max(R::zero()),
                avg.y.min(R::one()).max(R::zero()),
                avg.z.min(R::one()).max(R::zero()),
            ));
        }
    }

    let mut out = PointCloud::from_points(points)?;
    if cloud.has_normals() {
        out.set_normals(normals)?;
    }
    if cloud.has_colors() {
        out.set_colors(colors)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(pts: &[[f64; 3]]) -> PointCloud<f64> {
        PointCloud::from_points(pts.iter().map(|p| Vec3::from_array(*p)).collect()).unwrap()
    }

    #[test]
    fn empty_in_empty_out() {
        let out = voxel_downsample(&PointCloud::<f64>::new(), 0.01).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn single_point_survives_unchanged() {
        let c = cloud(&[[0.005, 0.005, 0.005]]);
        let out = voxel_downsample(&c, 0.01).unwrap();
        assert_eq!(out.points(), c.points());
    }

    #[test]
    fn points_in_one_cell_collapse_to_their_centroid() {
        // A small cube strictly inside the cell [0, 0.05)^3.
        let half = 0.005;
        let center = [0.025, 0.025, 0.025];
        let mut pts = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    pts.push([
                        center[0] + sx * half,
                        center[1] + sy * half,
                        center[2] + sz * half,
                    ]);
                }
            }
        }
        let out = voxel_downsample(&cloud(&pts), 0.05).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.point(0) - Vec3::from_array(center)).norm() < 1e-12);
    }

    #[test]
    fn cells_split_at_the_origin_boundary() {
        // floor() keying: -0.005 is in cell -1, +0.005 in cell 0.
        let out = voxel_downsample(&cloud(&[[-0.005, 0.0, 0.0], [0.005, 0.0, 0.0]]), 0.05).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn boundary_point_goes_to_higher_cell() {
        // 0.05 / 0.05 = 1.0 exactly: same cell as 0.07, not 0.03.
        let out = voxel_downsample(&cloud(&[[0.05, 0.0, 0.0], [0.07, 0.0, 0.0]]), 0.05).unwrap();
        assert_eq!(out.len(), 1);
        let out2 = voxel_downsample(&cloud(&[[0.05, 0.0, 0.0], [0.03, 0.0, 0.0]]), 0.05).unwrap();
        assert_eq!(out2.len(), 2);
    }

    #[test]
    fn redownsampling_is_idempotent_on_occupancy() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec3<f64>> = (0..500)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(-0.3..0.3),
                    rng.gen_range(-0.3..0.3),
                    rng.gen_range(-0.3..0.3),
                )
            })
            .collect();
        let c = PointCloud::from_points(pts).unwrap();
        let once = voxel_downsample(&c, 0.05).unwrap();
        let twice = voxel_downsample(&once, 0.05).unwrap();
        // Each centroid stays inside its own cell, so occupancy is stable.
        assert_eq!(once.len(), twice.len());
        let key = |p: &Vec3<f64>| {
            (
                (p.x / 0.05).floor() as i64,
                (p.y / 0.05).floor() as i64,
                (p.z / 0.05).floor() as i64,
            )
        };
        let k1: Vec<_> = once.points().iter().map(key).collect();
        let k2: Vec<_> = twice.points().iter().map(key).collect();
        assert_eq!(k1, k2);
    }

    #[test]
    fn normals_average_and_renormalize() {
        let mut c = cloud(&[[0.01, 0.01, 0.01], [0.02, 0.01, 0.01]]);
        let n1 = Vec3::new(1.0, 0.0, 0.0);
        let n2 = Vec3::new(0.0, 1.0, 0.0);
        c.set_normals(vec![n1, n2]).unwrap();
        let out = voxel_downsample(&c, 0.05).unwrap();
        assert_eq!(out.len(), 1);
        let n = out.normals().unwrap()[0];
        let expect = Vec3::new(1.0, 1.0, 0.0).normalized().unwrap();
        assert!((n - expect).norm() < 1e-12);
    }

    #[test]
    fn cancelling_normals_leave_the_invalid_flag() {
        let mut c = cloud(&[[0.01, 0.01, 0.01], [0.02, 0.01, 0.01]]);
        c.set_normals(vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)])
            .unwrap();
        let out = voxel_downsample(&c, 0.05).unwrap();
        assert!(!out.normal_is_valid(0));
    }

    #[test]
    fn colors_average() {
        let mut c = cloud(&[[0.01; 3], [0.02, 0.01, 0.01]]);
        c.set_colors(vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)])
            .unwrap();
        let out = voxel_downsample(&c, 0.05).unwrap();
        let col = out.colors().unwrap()[0];
        assert!((col - Vec3::new(0.5, 0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn bad_leaf_rejected() {
        let c = cloud(&[[0.0; 3]]);
        assert!(voxel_downsample(&c, 0.0).is_err());
        assert!(voxel_downsample(&c, -1.0).is_err());
        assert!(voxel_downsample(&c, f64::NAN).is_err());
    }
}
