//! Exact k-d tree over fixed-dimension rows.
//!
//! Built once, queried immutably. Queries return exactly what a linear
//! scan would: same hits, same distances, ties broken toward the lower
//! point index. Used with `dim = 3` for cloud geometry and `dim = 33`
//! for descriptor matching.

use crate::{Error, Real, Result};

const LEAF_SIZE: usize = 16;

#[derive(Clone, Debug)]
enum Node<R> {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u32,
        value: R,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug)]
pub struct KdTree<R> {
    dim: usize,
    coords: Vec<R>,
    order: Vec<u32>,
    nodes: Vec<Node<R>>,
    root: u32,
}

impl<R: Real> KdTree<R> {
    /// Build over `n` rows stored flat as `n * dim` values.
    pub fn from_flat(dim: usize, coords: Vec<R>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "coordinate buffer of {} values is not a multiple of dim {}",
                coords.len(),
                dim
            )));
        }
        let n = coords.len() / dim;
        if n == 0 {
            return Err(Error::EmptyCloud);
        }
        for c in &coords {
            if !c.is_finite() {
                return Err(Error::InvalidParameter("non-finite coordinate".into()));
            }
        }

        let mut tree = KdTree {
            dim,
            coords,
            order: (0..n as u32).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            root: 0,
        };
        tree.root = tree.build(0, n);
        Ok(tree)
    }

    pub fn from_points(points: &[crate::Vec3<R>]) -> Result<Self> {
        let mut flat = Vec::with_capacity(points.len() * 3);
        for p in points {
            flat.extend_from_slice(&[p.x, p.y, p.z]);
        }
        KdTree::from_flat(3, flat)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, id: u32) -> &[R] {
        let base = id as usize * self.dim;
        &self.coords[base..base + self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> u32 {
        let len = end - start;
        if len <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: start as u32,
                end: end as u32,
            });
            return (self.nodes.len() - 1) as u32;
        }

        // Split along the widest-spread axis at the median row.
        let mut axis = 0usize;
        let mut best_spread = -R::one();
        for a in 0..self.dim {
            let mut lo = self.coords[self.order[start] as usize * self.dim + a];
            let mut hi = lo;
            for &id in &self.order[start..end] {
                let v = self.coords[id as usize * self.dim + a];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let spread = hi - lo;
            if spread > best_spread {
                best_spread = spread;
                axis = a;
            }
        }

        let dim = self.dim;
        let coords = &self.coords;
        self.order[start..end].sort_unstable_by(|&a, &b| {
            let ca = coords[a as usize * dim + axis];
            let cb = coords[b as usize * dim + axis];
            ca.partial_cmp(&cb).unwrap().then(a.cmp(&b))
        });

        let mid = start + len / 2;
        let value = self.coords[self.order[mid] as usize * self.dim + axis];

        let node_slot = self.nodes.len();
        self.nodes.push(Node::Leaf { start: 0, end: 0 }); // placeholder
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[node_slot] = Node::Split {
            axis: axis as u32,
            value,
            left,
            right,
        };
        node_slot as u32
    }

    fn check_query(&self, query: &[R]) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if query.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "query dimension {} does not match index dimension {}",
                query.len(),
                self.dim
            )));
        }
        if query.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite query".into()));
        }
        Ok(())
    }

    fn dist_squared(&self, id: u32, query: &[R]) -> R {
        let row = self.row(id);
        let mut acc = R::zero();
        for k in 0..self.dim {
            let d = row[k] - query[k];
            acc += d * d;
        }
        acc
    }

    /// Closest row to `query`: `(row index, Euclidean distance)`. Among
    /// equidistant rows the lowest index wins.
    pub fn nearest(&self, query: &[R]) -> Result<(usize, R)> {
        self.check_query(query)?;
        let mut best_d2 = R::infinity();
        let mut best_id = u32::MAX;
        self.search_nearest(self.root, query, &mut best_d2, &mut best_id);
        Ok((best_id as usize, best_d2.sqrt()))
    }

    fn search_nearest(&self, node: u32, query: &[R], best_d2: &mut R, best_id: &mut u32) {
        match &self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &id in &self.order[*start as usize..*end as usize] {
                    let d2 = self.dist_squared(id, query);
                    if d2 < *best_d2 || (d2 == *best_d2 && id < *best_id) {
                        *best_d2 = d2;
                        *best_id = id;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis as usize] - *value;
                let (near, far) = if delta < R::zero() {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search_nearest(near, query, best_d2, best_id);
                // An equidistant lower-index row may sit exactly on the
                // plane, so the far side is pruned only on strict excess.
                if delta * delta <= *best_d2 {
                    self.search_nearest(far, query, best_d2, best_id);
                }
            }
        }
    }

    /// Every row within `radius` of `query` (boundary inclusive), sorted
    /// by distance, ties toward the lower index.
    pub fn within_radius(&self, query: &[R], radius: R) -> Result<Vec<(usize, R)>> {
        self.check_query(query)?;
        if !radius.is_finite() || radius < R::zero() {
            return Err(Error::InvalidParameter(
                "radius must be finite and non-negative".into(),
            ));
        }
        let r2 = radius * radius;
        let mut hits: Vec<(u32, R)> = Vec::new();
        self.search_radius(self.root, query, r2, &mut hits);
        hits.sort_unstable_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        Ok(hits
            .into_iter()
            .map(|(id, d2)| (id as usize, d2.sqrt()))
            .collect())
    }

    fn search_radius(&self, node: u32, query: &[R], r2: R, hits: &mut Vec<(u32, R)>) {
        match &self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &id in &self.order[*start as usize..*end as usize] {
                    let d2 = self.dist_squared(id, query);
                    if d2 <= r2 {
                        hits.push((id, d2));
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis as usize] - *value;
                let (near, far) = if delta < R::zero() {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search_radius(near, query, r2, hits);
                if delta * delta <= r2 {
                    self.search_radius(far, query, r2, hits);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    fn tree(pts: &[[f64; 3]]) -> KdTree<f64> {
        let v: Vec<Vec3<f64>> = pts.iter().map(|p| Vec3::from_array(*p)).collect();
        KdTree::from_points(&v).unwrap()
    }

    #[test]
    fn query_at_stored_point_returns_it_at_distance_zero() {
        let t = tree(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]);
        let (i, d) = t.nearest(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(i, 1);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn equidistant_tie_goes_to_lower_index() {
        // Both neighbors at distance 1 from the query.
        let t = tree(&[[2.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let (i, d) = t.nearest(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(i, 0);
        assert_eq!(d, 1.0);
    }

    #[test]
    fn radius_boundary_is_inclusive() {
        let t = tree(&[[1.0, 0.0, 0.0]]);
        let hits = t.within_radius(&[0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(hits, vec![(0, 1.0)]);
    }

    #[test]
    fn radius_below_spacing_yields_only_self() {
        let pts: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, 0.0, 0.0]).collect();
        let t = tree(&pts);
        let hits = t.within_radius(&[4.0, 0.0, 0.0], 0.5).unwrap();
        assert_eq!(hits, vec![(4, 0.0)]);
    }

    #[test]
    fn duplicate_points_keep_deterministic_order() {
        let t = tree(&[[1.0; 3], [1.0; 3], [1.0; 3], [2.0; 3]]);
        let (i, d) = t.nearest(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((i, d), (0, 0.0));
        let hits = t.within_radius(&[1.0, 1.0, 1.0], 0.1).unwrap();
        let ids: Vec<usize> = hits.iter().map(|h| h.0).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn empty_build_is_rejected() {
        assert!(matches!(
            KdTree::<f64>::from_flat(3, vec![]),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let t = tree(&[[0.0; 3]]);
        assert!(t.nearest(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn works_in_high_dimension() {
        // Two 33-dim rows differing in one coordinate.
        let mut a = vec![0.0f64; 33];
        let b = vec![0.0f64; 33];
        a[17] = 3.0;
        let mut flat = a.clone();
        flat.extend_from_slice(&b);
        let t = KdTree::from_flat(33, flat).unwrap();
        let mut q = vec![0.0f64; 33];
        q[17] = 1.0;
        let (i, d) = t.nearest(&q).unwrap();
        assert_eq!(i, 1);
        assert!((d - 1.0).abs() < 1e-15);
    }
}
