//! Point-to-plane ICP refinement and alignment quality measurement.

use crate::linalg::solve;
use crate::{Error, KdTree, PointCloud, Real, Result, RigidTransform, Vec3};

#[derive(Clone, Debug)]
pub struct IcpParams<R> {
    /// Correspondence cutoff: source points farther than this from their
    /// nearest target point are unmatched.
    pub max_dist: R,
    pub max_iterations: usize,
    /// Convergence needs the relative change of fitness and rmse both
    /// below this between consecutive sweeps.
    pub rel_tol: R,
}

impl<R: Real> Default for IcpParams<R> {
    fn default() -> Self {
        IcpParams {
            max_dist: R::c(0.01),
            max_iterations: 30,
            rel_tol: R::c(1e-6),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IcpResult<R> {
    pub transform: RigidTransform<R>,
    /// Fraction of source points with a match within the cutoff.
    pub fitness: R,
    /// Point-to-point RMSE over the matched pairs.
    pub inlier_rmse: R,
    pub iterations_run: usize,
    pub converged: bool,
    /// Set when no source point found any match; the transform is then the
    /// initial guess passed in, and fitness is zero.
    pub no_overlap: bool,
}

/// Alignment quality of `transform` mapping `source` onto `target`:
/// nearest-neighbor residuals within `max_dist`, with the match count
/// related to the target's size.
#[derive(Clone, Copy, Debug)]
pub struct RmseReport<R> {
    pub rmse: R,
    pub inlier_ratio: R,
    /// Zero means nothing matched; rmse and ratio are then zero too, which
    /// is the "flagged" disjoint outcome rather than a perfect score.
    pub inlier_count: usize,
}

/// One matched pair: source point (untransformed), target point, target
/// normal.
struct PlanePair<R> {
    p: Vec3<R>,
    q: Vec3<R>,
    n: Vec3<R>,
}

fn check_max_dist<R: Real>(max_dist: R) -> Result<()> {
    if !max_dist.is_finite() || max_dist <= R::zero() {
        return Err(Error::InvalidParameter(
            "correspondence distance must be positive and finite".into(),
        ));
    }
    Ok(())
}

pub fn icp_point_to_plane<R: Real>(
    source: &PointCloud<R>,
    target: &PointCloud<R>,
    init: &RigidTransform<R>,
    params: &IcpParams<R>,
) -> Result<IcpResult<R>> {
    check_max_dist(params.max_dist)?;
    if !params.rel_tol.is_finite() || params.rel_tol < R::zero() {
        return Err(Error::InvalidParameter(
            "relative tolerance must be non-negative and finite".into(),
        ));
    }
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !target.has_normals() {
        return Err(Error::InvalidParameter(
            "point-to-plane refinement needs target normals".into(),
        ));
    }

    let no_overlap = |iterations_run: usize| IcpResult {
        transform: init.clone(),
        fitness: R::zero(),
        inlier_rmse: R::zero(),
        iterations_run,
        converged: false,
        no_overlap: true,
    };
    if source.is_empty() {
        return Ok(no_overlap(0));
    }

    let tree = KdTree::from_points(target.points())?;
    let normals = target.normals().unwrap();
    let pair_up = |t: &RigidTransform<R>| -> Vec<PlanePair<R>> {
        let mut pairs = Vec::new();
        for i in 0..source.len() {
            let p = source.point(i);
            let moved = t.apply(&p);
            let (j, d) = tree
                .nearest(&moved.to_array())
                .expect("tree and query are finite and non-empty");
            if d <= params.max_dist && target.normal_is_valid(j) {
                pairs.push(PlanePair {
                    p,
                    q: target.point(j),
                    n: normals[j],
                });
            }
        }
        pairs
    };
    let source_count = R::from_usize(source.len()).unwrap();
    let point_stats = |pairs: &[PlanePair<R>], t: &RigidTransform<R>| -> (R, R) {
        let mut sum_sq = R::zero();
        for pair in pairs {
            sum_sq += (t.apply(&pair.p) - pair.q).norm_squared();
        }
        let fitness = R::from_usize(pairs.len()).unwrap() / source_count;
        let rmse = if pairs.is_empty() {
            R::zero()
        } else {
            (sum_sq / R::from_usize(pairs.len()).unwrap()).sqrt()
        };
        (fitness, rmse)
    };
    let rel_change = |new: R, old: R| (new - old).abs() / old.abs().max(R::c(1e-30));

    let mut t = init.clone();
    let mut prev: Option<(R, R)> = None;
    let mut iterations_run = 0usize;
    let mut converged = false;

    for _ in 0..params.max_iterations {
        let pairs = pair_up(&t);
        if pairs.is_empty() {
            if iterations_run == 0 {
                return Ok(no_overlap(0));
            }
            break;
        }
        let (fitness, rmse) = point_stats(&pairs, &t);
        if let Some((pf, pr)) = prev {
            if rel_change(fitness, pf) < params.rel_tol && rel_change(rmse, pr) < params.rel_tol {
                converged = true;
                break;
            }
        }
        prev = Some((fitness, rmse));

        let mut a = [[R::zero(); 6]; 6];
        let mut b = [R::zero(); 6];
        for pair in &pairs {
            let p1 = t.apply(&pair.p);
            let r = pair.n.dot(&(p1 - pair.q));
            let cx = p1.cross(&pair.n);
            let jac = [cx.x, cx.y, cx.z, pair.n.x, pair.n.y, pair.n.z];
            for i in 0..6 {
                b[i] -= jac[i] * r;
                for j in 0..6 {
                    a[i][j] += jac[i] * jac[j];
                }
            }
        }
        let Some(step) = solve(&a, &b) else {
            break;
        };

        // Backtrack until the plane error over this correspondence set does
        // not increase; at a local optimum the step collapses to zero and
        // is accepted as-is.
        let obj_now = plane_objective(&pairs, &t);
        let mut omega = Vec3::new(step[0], step[1], step[2]);
        let mut v = Vec3::new(step[3], step[4], step[5]);
        let mut accepted = false;
        for _ in 0..24 {
            let candidate = RigidTransform::from_twist(omega, v).compose(&t);
            if plane_objective(&pairs, &candidate) <= obj_now {
                t = candidate;
                accepted = true;
                break;
            }
            omega = omega * R::c(0.5);
            v = v * R::c(0.5);
        }
        if !accepted {
            break;
        }
        iterations_run += 1;
    }

    let pairs = pair_up(&t);
    if pairs.is_empty() {
        return Ok(no_overlap(iterations_run));
    }
    let (fitness, inlier_rmse) = point_stats(&pairs, &t);
    Ok(IcpResult {
        transform: t,
        fitness,
        inlier_rmse,
        iterations_run,
        converged,
        no_overlap: false,
    })
}

fn plane_objective<R: Real>(pairs: &[PlanePair<R>], t: &RigidTransform<R>) -> R {
    let mut acc = R::zero();
    for pair in pairs {
        let r = pair.n.dot(&(t.apply(&pair.p) - pair.q));
        acc += r * r;
    }
    acc
}

/// Nearest-neighbor RMSE and inlier ratio of `transform` applied to
/// `source` against `target`. Pairs farther than `max_dist` are ignored;
/// when nothing pairs up the report carries zeros with `inlier_count` 0.
pub fn registration_rmse<R: Real>(
    source: &PointCloud<R>,
    target: &PointCloud<R>,
    transform: &RigidTransform<R>,
    max_dist: R,
) -> Result<RmseReport<R>> {
    check_max_dist(max_dist)?;
    let empty = RmseReport {
        rmse: R::zero(),
        inlier_ratio: R::zero(),
        inlier_count: 0,
    };
    if source.is_empty() || target.is_empty() {
        return Ok(empty);
    }
    let tree = KdTree::from_points(target.points())?;
    let mut count = 0usize;
    let mut sum_sq = R::zero();
    for i in 0..source.len() {
        let moved = transform.apply(&source.point(i));
        let (_, d) = tree
            .nearest(&moved.to_array())
            .expect("tree and query are finite and non-empty");
        if d <= max_dist {
            count += 1;
            sum_sq += d * d;
        }
    }
    if count == 0 {
        return Ok(empty);
    }
    let ratio = (R::from_usize(count).unwrap() / R::from_usize(target.len()).unwrap()).min(R::one());
    Ok(RmseReport {
        rmse: (sum_sq / R::from_usize(count).unwrap()).sqrt(),
        inlier_ratio: ratio,
        inlier_count: count,
    })
}
