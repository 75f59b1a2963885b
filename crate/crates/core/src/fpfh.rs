//! Fast point feature histograms.
//!
//! A descriptor is three concatenated 11-bin angle histograms (alpha,
//! phi, theta of the Darboux frame between a point and each radius
//! neighbor), each normalized to sum 100. The two-pass scheme first
//! builds the simplified per-point histogram (SPFH), then blends each
//! keypoint's SPFH with its neighbors', weighted by inverse distance.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, KdTree, PointCloud, Real, Result, Vec3};

pub const FPFH_DIM: usize = 33;
const ANGLE_BINS: usize = 11;

const MAGIC: &[u8; 4] = b"FPFH";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpfhDescriptor {
    pub bins: [f32; FPFH_DIM],
}

impl FpfhDescriptor {
    /// Squared Euclidean distance between descriptors, summed in bin
    /// order so every caller rounds identically.
    pub fn distance_squared(&self, other: &Self) -> f32 {
        let mut acc = 0.0f32;
        for k in 0..FPFH_DIM {
            let d = self.bins[k] - other.bins[k];
            acc += d * d;
        }
        acc
    }

    pub fn distance(&self, other: &Self) -> f32 {
        self.distance_squared(other).sqrt()
    }
}

/// Descriptors for a subset of a cloud's points, index-aligned with it.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FeatureSet {
    keypoint_indices: Vec<u32>,
    descriptors: Vec<FpfhDescriptor>,
}

impl FeatureSet {
    pub fn new(keypoint_indices: Vec<u32>, descriptors: Vec<FpfhDescriptor>) -> Result<Self> {
        if keypoint_indices.len() != descriptors.len() {
            return Err(Error::InvalidParameter(format!(
                "{} keypoints but {} descriptors",
                keypoint_indices.len(),
                descriptors.len()
            )));
        }
        let mut seen = HashSet::with_capacity(keypoint_indices.len());
        for &i in &keypoint_indices {
            if !seen.insert(i) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate keypoint index {i}"
                )));
            }
        }
        for d in &descriptors {
            for b in d.bins {
                if !b.is_finite() || b < 0.0 {
                    return Err(Error::InvalidParameter(
                        "descriptor bins must be finite and non-negative".into(),
                    ));
                }
            }
        }
        Ok(FeatureSet {
            keypoint_indices,
            descriptors,
        })
    }

    pub fn len(&self) -> usize {
        self.keypoint_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoint_indices.is_empty()
    }

    pub fn keypoint_indices(&self) -> &[u32] {
        &self.keypoint_indices
    }

    pub fn descriptors(&self) -> &[FpfhDescriptor] {
        &self.descriptors
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        w.write_all(&(FPFH_DIM as u32).to_le_bytes())?;
        for (i, d) in self.keypoint_indices.iter().zip(&self.descriptors) {
            w.write_all(&i.to_le_bytes())?;
            for b in d.bins {
                w.write_all(&b.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Parse("feature file shorter than its header".into()))?;
        if &magic != MAGIC {
            return Err(Error::Parse("bad feature file magic".into()));
        }
        let mut u32buf = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut u32buf)
                .map_err(|_| Error::Parse("feature file shorter than its header".into()))?;
            Ok(u32::from_le_bytes(u32buf))
        };
        let version = read_u32(r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported feature file version {version}"
            )));
        }
        let count = read_u32(r)? as usize;
        let dim = read_u32(r)? as usize;
        if dim != FPFH_DIM {
            return Err(Error::Parse(format!(
                "feature file has dimension {dim}, expected {FPFH_DIM}"
            )));
        }

        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        let record = 4 + FPFH_DIM * 4;
        if body.len() != count * record {
            return Err(Error::Parse(format!(
                "feature file body is {} bytes, expected {}",
                body.len(),
                count * record
            )));
        }

        let mut indices = Vec::with_capacity(count);
        let mut descriptors = Vec::with_capacity(count);
        for rec in body.chunks_exact(record) {
            indices.push(u32::from_le_bytes(rec[0..4].try_into().unwrap()));
            let mut bins = [0.0f32; FPFH_DIM];
            for (k, chunk) in rec[4..].chunks_exact(4).enumerate() {
                bins[k] = f32::from_le_bytes(chunk.try_into().unwrap());
            }
            descriptors.push(FpfhDescriptor { bins });
        }
        FeatureSet::new(indices, descriptors).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        FeatureSet::read_from(&mut f)
    }
}

#[inline]
fn bin_index<R: Real>(x: R, lo: R, hi: R) -> usize {
    let t = (x - lo) / (hi - lo) * R::from_usize(ANGLE_BINS).unwrap();
    let idx = t.floor().to_isize().unwrap_or(0);
    idx.clamp(0, ANGLE_BINS as isize - 1) as usize
}

/// Darboux-frame pair features between a source/target candidate pair.
/// The point whose normal makes the smaller angle with the connecting
/// line acts as source. Returns `(alpha, phi, theta)`; `None` for
/// coincident points.
fn pair_features<R: Real>(
    ps: Vec3<R>,
    ns: Vec3<R>,
    pt: Vec3<R>,
    nt: Vec3<R>,
) -> Option<(R, R, R)> {
    let diff = pt - ps;
    let dist = diff.norm();
    if dist == R::zero() {
        return None;
    }
    let mut dhat = diff / dist;
    let (u, n_t) = if ns.dot(&dhat).abs() >= nt.dot(&dhat).abs() {
        (ns, nt)
    } else {
        dhat = -dhat;
        (nt, ns)
    };
    let v = u.cross(&dhat);
    let w = u.cross(&v);
    let alpha = v.dot(&n_t);
    let phi = u.dot(&dhat);
    let theta = w.dot(&n_t).atan2(u.dot(&n_t));
    Some((alpha, phi, theta))
}

/// Accumulate one pair into the three 11-bin groups.
fn accumulate<R: Real>(hist: &mut [R; FPFH_DIM], alpha: R, phi: R, theta: R) {
    let one = R::one();
    let pi = R::c(std::f64::consts::PI);
    hist[bin_index(alpha, -one, one)] += one;
    hist[ANGLE_BINS + bin_index(phi, -one, one)] += one;
    hist[2 * ANGLE_BINS + bin_index(theta, -pi, pi)] += one;
}

/// Scale each 11-bin group to sum 100; all-zero groups stay zero.
fn normalize_groups<R: Real>(hist: &mut [R; FPFH_DIM]) {
    let hundred = R::c(100.0);
    for g in 0..3 {
        let group = &mut hist[g * ANGLE_BINS..(g + 1) * ANGLE_BINS];
        let sum = group.iter().fold(R::zero(), |a, &b| a + b);
        if sum > R::zero() {
            for b in group {
                *b = *b / sum * hundred;
            }
        }
    }
}

/// Simplified point feature histogram of one point against an explicit
/// neighbor list.
///
/// The point and every neighbor must carry a valid normal; neighbors
/// coincident with the point contribute nothing. With an empty neighbor
/// list the histogram is all zeros.
pub fn compute_spfh<R: Real>(
    cloud: &PointCloud<R>,
    point_index: usize,
    neighbor_indices: &[usize],
) -> Result<[R; FPFH_DIM]> {
    if point_index >= cloud.len() {
        return Err(Error::InvalidParameter(format!(
            "point index {point_index} out of range"
        )));
    }
    if !cloud.normal_is_valid(point_index) {
        return Err(Error::InvalidParameter(format!(
            "no valid normal at point {point_index}"
        )));
    }
    let normals = cloud.normals().unwrap();
    let p = cloud.point(point_index);
    let np = normals[point_index];

    let mut hist = [R::zero(); FPFH_DIM];
    for &j in neighbor_indices {
        if j >= cloud.len() {
            return Err(Error::InvalidParameter(format!(
                "neighbor index {j} out of range"
            )));
        }
        if j == point_index {
            return Err(Error::InvalidParameter(
                "neighbor list contains the point itself".into(),
            ));
        }
        if !cloud.normal_is_valid(j) {
            return Err(Error::InvalidParameter(format!(
                "no valid normal at neighbor {j}"
            )));
        }
        if let Some((a, f, t)) = pair_features(p, np, cloud.point(j), normals[j]) {
            accumulate(&mut hist, a, f, t);
        }
    }
    normalize_groups(&mut hist);
    Ok(hist)
}

/// FPFH descriptors for `keypoints`, using the same `radius` for the
/// neighborhood of the keypoint and of each neighbor.
///
/// Keypoints without a valid normal, or with no usable neighbor inside
/// the radius, are dropped from the output; compare input and output
/// lengths for the drop count. Neighbors without valid normals are
/// ignored throughout.
pub fn compute_fpfh<R: Real>(
    cloud: &PointCloud<R>,
    keypoints: &[usize],
    radius: R,
) -> Result<FeatureSet> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !cloud.has_normals() {
        return Err(Error::InvalidParameter(
            "descriptor computation needs normals".into(),
        ));
    }
    if !(radius.is_finite() && radius > R::zero()) {
        return Err(Error::InvalidParameter(
            "descriptor radius must be finite and positive".into(),
        ));
    }
    {
        let mut seen = HashSet::with_capacity(keypoints.len());
        for &k in keypoints {
            if k >= cloud.len() {
                return Err(Error::InvalidParameter(format!(
                    "keypoint index {k} out of range"
                )));
            }
            if !seen.insert(k) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate keypoint index {k}"
                )));
            }
        }
    }

    let tree = KdTree::from_points(cloud.points())?;

    // Usable neighbors of a point: inside the radius, not the point
    // itself, not coincident with it, and carrying a valid normal.
    let neighbors_of = |i: usize| -> Result<Vec<(usize, R)>> {
        let hits = tree.within_radius(&cloud.point(i).to_array(), radius)?;
        Ok(hits
            .into_iter()
            .filter(|&(j, d)| j != i && d > R::zero() && cloud.normal_is_valid(j))
            .collect())
    };

    let mut spfh_cache: Vec<Option<Box<[R; FPFH_DIM]>>> = vec![None; cloud.len()];
    let spfh_of = |i: usize, cache: &mut Vec<Option<Box<[R; FPFH_DIM]>>>| -> Result<Box<[R; FPFH_DIM]>> {
        if let Some(h) = &cache[i] {
            return Ok(h.clone());
        }
        let neigh: Vec<usize> = neighbors_of(i)?.into_iter().map(|(j, _)| j).collect();
        let h = Box::new(compute_spfh(cloud, i, &neigh)?);
        cache[i] = Some(h.clone());
        Ok(h)
    };

    let mut out_indices = Vec::with_capacity(keypoints.len());
    let mut out_descriptors = Vec::with_capacity(keypoints.len());

    for &k in keypoints {
        if !cloud.normal_is_valid(k) {
            continue;
        }
        let neigh = neighbors_of(k)?;
        if neigh.is_empty() {
            continue;
        }

        let mut hist = *spfh_of(k, &mut spfh_cache)?;
        let inv_k = R::one() / R::from_usize(neigh.len()).unwrap();
        for &(j, dist) in &neigh {
            let nh = spfh_of(j, &mut spfh_cache)?;
            let w = inv_k / dist;
            for b in 0..FPFH_DIM {
                hist[b] += nh[b] * w;
            }
        }
        normalize_groups(&mut hist);

        let mut bins = [0.0f32; FPFH_DIM];
        for (out, h) in bins.iter_mut().zip(hist.iter()) {
            *out = h.to_f64().unwrap() as f32;
        }
        out_indices.push(k as u32);
        out_descriptors.push(FpfhDescriptor { bins });
    }

    FeatureSet::new(out_indices, out_descriptors)
}
