use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::RgbImage;

use crate::error::{Error, Result};

/// Default embedding width used by the classifier stage.
pub const EMBEDDING_DIM: usize = 1000;

/// Images are resampled to this square edge before the color histogram is
/// accumulated, so the embedding is independent of the crop resolution.
const RESIZE_EDGE: usize = 224;

const MAGIC: &[u8; 4] = b"EMB1";

/// Fixed-width feature vector describing one object crop.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    values: Vec<f32>,
}

impl Embedding {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "embedding contains a non-finite value".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.values.len() as u32).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Parse("embedding file is truncated".into()))?;
        if &magic != MAGIC {
            return Err(Error::Parse("bad embedding magic".into()));
        }
        let mut len_bytes = [0u8; 4];
        r.read_exact(&mut len_bytes)
            .map_err(|_| Error::Parse("embedding file is truncated".into()))?;
        let len = u32::from_le_bytes(len_bytes) as usize;
        let mut values = Vec::with_capacity(len);
        let mut buf = [0u8; 4];
        for _ in 0..len {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Parse("embedding file is truncated".into()))?;
            let v = f32::from_le_bytes(buf);
            if !v.is_finite() {
                return Err(Error::Parse("embedding contains a non-finite value".into()));
            }
            values.push(v);
        }
        Ok(Self { values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Loads an embedding produced by an external network and checks its width.
///
/// Trailing bytes after the declared payload are rejected so a concatenated
/// or corrupted file cannot slip through.
pub fn load_external_embedding(path: &Path, expected_dim: usize) -> Result<Embedding> {
    let mut r = BufReader::new(File::open(path)?);
    let embedding = Embedding::read_from(&mut r)?;
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Parse("trailing bytes after embedding payload".into()));
    }
    if embedding.len() != expected_dim {
        return Err(Error::DimensionMismatch {
            expected: expected_dim,
            got: embedding.len(),
        });
    }
    Ok(embedding)
}

/// Color-distribution fallback used when no learned embedding is available.
///
/// The crop is resampled to 224x224 by nearest neighbor, then a joint RGB
/// histogram with `dim` cells (cube root per channel) is accumulated and
/// normalized to unit mass. `dim` must be a perfect cube.
pub fn extract_baseline_embedding(crop: &RgbImage, dim: usize) -> Result<Embedding> {
    if crop.width() == 0 || crop.height() == 0 {
        return Err(Error::EmptyImage);
    }
    let bins = (dim as f64).cbrt().round() as usize;
    if bins == 0 || bins * bins * bins != dim {
        return Err(Error::InvalidParameter(format!(
            "embedding width {dim} is not a perfect cube"
        )));
    }

    let (w, h) = (crop.width() as usize, crop.height() as usize);
    let mut counts = vec![0u32; dim];
    for oy in 0..RESIZE_EDGE {
        let sy = (((oy as f64 + 0.5) * h as f64 / RESIZE_EDGE as f64) as usize).min(h - 1);
        for ox in 0..RESIZE_EDGE {
            let sx = (((ox as f64 + 0.5) * w as f64 / RESIZE_EDGE as f64) as usize).min(w - 1);
            let p = crop.get_pixel(sx as u32, sy as u32);
            let r = p.0[0] as usize * bins / 256;
            let g = p.0[1] as usize * bins / 256;
            let b = p.0[2] as usize * bins / 256;
            counts[(r * bins + g) * bins + b] += 1;
        }
    }

    let total = (RESIZE_EDGE * RESIZE_EDGE) as f64;
    let values = counts.iter().map(|&c| (c as f64 / total) as f32).collect();
    Ok(Embedding { values })
}
