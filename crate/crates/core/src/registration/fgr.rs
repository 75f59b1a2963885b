//! Fast global registration: graduated non-convexity over a scaled
//! Geman-McClure cost, with mutual matching and a tuple filter up front.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_threshold, match_features, CandidateSet, RegistrationResult};
use crate::linalg::solve;
use crate::{Error, FeatureSet, PointCloud, Real, Result, RigidTransform, Vec3};

#[derive(Clone, Debug)]
pub struct FgrParams<R> {
    pub iterations: usize,
    /// Edge-ratio bound of the tuple test; a triple passes when every edge
    /// ratio lies strictly inside (ratio, 1/ratio).
    pub tuple_ratio: R,
    /// How many random triples the tuple test draws.
    pub tuple_count: usize,
    pub inlier_threshold: R,
    pub seed: u64,
}

impl<R: Real> Default for FgrParams<R> {
    fn default() -> Self {
        FgrParams {
            iterations: 100,
            tuple_ratio: R::c(0.9),
            tuple_count: 1000,
            inlier_threshold: R::c(0.01),
            seed: 0,
        }
    }
}

pub fn fgr_registration<R: Real>(
    source: &PointCloud<R>,
    target: &PointCloud<R>,
    src_feats: &FeatureSet,
    tgt_feats: &FeatureSet,
    params: &FgrParams<R>,
) -> Result<RegistrationResult<R>> {
    check_threshold(params.inlier_threshold)?;
    if !(params.tuple_ratio > R::zero() && params.tuple_ratio < R::one()) {
        return Err(Error::InvalidParameter(
            "tuple ratio must lie in (0, 1)".into(),
        ));
    }
    let correspondences = match_features(src_feats, tgt_feats, true)?;
    if correspondences.len() < 3 {
        return Err(Error::TooFewCorrespondences(correspondences.len()));
    }
    let candidates = CandidateSet::resolve(source, target, src_feats, tgt_feats, correspondences)?;

    let kept = tuple_filter(&candidates, params);
    if kept.len() < 3 {
        return Err(Error::TooFewCorrespondences(kept.len()));
    }
    let pairs: Vec<(Vec3<R>, Vec3<R>)> = kept
        .iter()
        .map(|&i| (candidates.source_points[i], candidates.target_points[i]))
        .collect();

    let diameter = source
        .bounding_box()?
        .diagonal()
        .max(target.bounding_box()?.diagonal());
    let transform = graduated_solve(&pairs, diameter, params);

    let (inliers, rmse) = candidates.score(&transform, params.inlier_threshold);
    Ok(candidates.result(target, transform, inliers, rmse))
}

/// Random-triple consistency filter. Accepted triples contribute all three
/// of their correspondences; the set collapses duplicates.
fn tuple_filter<R: Real>(candidates: &CandidateSet<R>, params: &FgrParams<R>) -> Vec<usize> {
    let n = candidates.len();
    let lo = params.tuple_ratio;
    let hi = R::one() / lo;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut kept: BTreeSet<usize> = BTreeSet::new();

    for _ in 0..params.tuple_count {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n);
        while b == a {
            b = rng.gen_range(0..n);
        }
        let mut c = rng.gen_range(0..n);
        while c == a || c == b {
            c = rng.gen_range(0..n);
        }
        let triple = [a, b, c];
        let consistent = (0..3).all(|k| {
            let (i, j) = (triple[k], triple[(k + 1) % 3]);
            let ds = candidates.source_points[i].distance(&candidates.source_points[j]);
            let dt = candidates.target_points[i].distance(&candidates.target_points[j]);
            let ratio = ds / dt;
            ratio > lo && ratio < hi
        });
        if consistent {
            kept.extend(triple);
        }
    }
    kept.into_iter().collect()
}

/// Minimize the scaled Geman-McClure cost sum mu*r^2/(mu+r^2) by
/// alternating closed-form line-process weights with damped Gauss-Newton
/// steps, annealing mu from the squared cloud diameter down to the squared
/// inlier threshold.
fn graduated_solve<R: Real>(
    pairs: &[(Vec3<R>, Vec3<R>)],
    diameter: R,
    params: &FgrParams<R>,
) -> RigidTransform<R> {
    let mut t = RigidTransform::identity();
    let mu_floor = params.inlier_threshold * params.inlier_threshold;
    let mut mu = (diameter * diameter).max(mu_floor);

    for iter in 0..params.iterations {
        if iter > 0 && iter % 4 == 0 {
            mu = (mu / R::c(1.4)).max(mu_floor);
        }
        #[cfg(debug_assertions)]
        let cost_before = geman_mcclure_cost(pairs, &t, mu);

        // Closed-form optimal line-process weights for the current pose.
        let mut weights = Vec::with_capacity(pairs.len());
        let mut weighted_sse = R::zero();
        for (p, q) in pairs {
            let r2 = (t.apply(p) - *q).norm_squared();
            let l = (mu / (mu + r2)) * (mu / (mu + r2));
            weights.push(l);
            weighted_sse += l * r2;
        }

        let mut a = [[R::zero(); 6]; 6];
        let mut b = [R::zero(); 6];
        for (k, (p, q)) in pairs.iter().enumerate() {
            let l = weights[k];
            let p1 = t.apply(p);
            let e = p1 - *q;
            // Row r of the residual Jacobian in the twist (omega, v):
            // d e / d omega = -[p1]x, d e / d v = I.
            let jac = [
                [R::zero(), p1.z, -p1.y, R::one(), R::zero(), R::zero()],
                [-p1.z, R::zero(), p1.x, R::zero(), R::one(), R::zero()],
                [p1.y, -p1.x, R::zero(), R::zero(), R::zero(), R::one()],
            ];
            let ev = [e.x, e.y, e.z];
            for row in 0..3 {
                for i in 0..6 {
                    b[i] -= l * jac[row][i] * ev[row];
                    for j in 0..6 {
                        a[i][j] += l * jac[row][i] * jac[row][j];
                    }
                }
            }
        }

        let Some(step) = solve(&a, &b) else {
            continue;
        };

        // Halve the step until the fixed-weight cost stops increasing, so
        // each sweep is monotone in the overall objective.
        let mut omega = Vec3::new(step[0], step[1], step[2]);
        let mut v = Vec3::new(step[3], step[4], step[5]);
        for _ in 0..24 {
            let candidate = RigidTransform::from_twist(omega, v).compose(&t);
            let mut sse = R::zero();
            for (k, (p, q)) in pairs.iter().enumerate() {
                sse += weights[k] * (candidate.apply(p) - *q).norm_squared();
            }
            if sse <= weighted_sse {
                t = candidate;
                break;
            }
            omega = omega * R::c(0.5);
            v = v * R::c(0.5);
        }

        // With weights optimal for the pose they were computed at, a
        // non-increasing fixed-weight cost forces the robust cost down too.
        #[cfg(debug_assertions)]
        {
            let cost_after = geman_mcclure_cost(pairs, &t, mu);
            debug_assert!(
                cost_after <= cost_before + cost_before.abs() * R::c(1e-9) + R::c(1e-12),
                "robust cost rose within one sweep: {cost_before} -> {cost_after}"
            );
        }
    }
    t
}

/// The annealed robust cost at a given scale; feeds the per-sweep
/// monotonicity check.
#[cfg(debug_assertions)]
fn geman_mcclure_cost<R: Real>(
    pairs: &[(Vec3<R>, Vec3<R>)],
    t: &RigidTransform<R>,
    mu: R,
) -> R {
    let mut acc = R::zero();
    for (p, q) in pairs {
        let r2 = (t.apply(p) - *q).norm_squared();
        acc += mu * r2 / (mu + r2);
    }
    acc
}
