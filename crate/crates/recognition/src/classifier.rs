use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};

/// Multinomial logistic classifier over crop embeddings.
///
/// Weights are stored row-major, one row per class, in the sorted order of
/// `class_labels`. Arithmetic runs in f64; storage is f32.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    class_labels: Vec<String>,
    dim: usize,
    weights: Vec<f32>,
    biases: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    class_labels: Vec<String>,
    dim: usize,
}

impl LogisticModel {
    pub fn from_parts(
        class_labels: Vec<String>,
        dim: usize,
        weights: Vec<f32>,
        biases: Vec<f32>,
    ) -> Result<Self> {
        if class_labels.len() < 2 {
            return Err(Error::SingleClass);
        }
        if weights.len() != class_labels.len() * dim || biases.len() != class_labels.len() {
            return Err(Error::InvalidParameter(
                "weight block does not match classes x dim".into(),
            ));
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "model contains a non-finite value".into(),
            ));
        }
        Ok(Self {
            class_labels,
            dim,
            weights,
            biases,
        })
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn biases(&self) -> &[f32] {
        &self.biases
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let header = ModelHeader {
            class_labels: self.class_labels.clone(),
            dim: self.dim,
        };
        let mut line = serde_json::to_string(&header)?;
        line.push('\n');
        w.write_all(line.as_bytes())?;
        for v in self.weights.iter().chain(&self.biases) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut line = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            if r.read(&mut byte)? == 0 {
                return Err(Error::Parse("model file has no header line".into()));
            }
            if byte[0] == b'\n' {
                break;
            }
            line.push(byte[0]);
            if line.len() > 1 << 20 {
                return Err(Error::Parse("model header is unreasonably long".into()));
            }
        }
        let header: ModelHeader = serde_json::from_slice(&line)
            .map_err(|e| Error::Parse(format!("bad model header: {e}")))?;

        let k = header.class_labels.len();
        let count = k * header.dim + k;
        let mut values = Vec::with_capacity(count);
        let mut buf = [0u8; 4];
        for _ in 0..count {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Parse("model file is truncated".into()))?;
            values.push(f32::from_le_bytes(buf));
        }
        if r.read(&mut byte)? != 0 {
            return Err(Error::Parse("trailing bytes after model payload".into()));
        }
        let biases = values.split_off(k * header.dim);
        Self::from_parts(header.class_labels, header.dim, values, biases)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrainParams {
    /// L2 penalty on the weight matrix. Biases are not penalized.
    pub l2: f64,
    pub max_epochs: usize,
    /// Training stops once the full gradient norm drops below this.
    pub grad_tol: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            max_epochs: 500,
            grad_tol: 1e-5,
        }
    }
}

/// Objective values along the accepted iterates, initial parameters included.
#[derive(Clone, Debug)]
pub struct TrainReport {
    pub epochs: usize,
    pub losses: Vec<f64>,
    pub final_grad_norm: f64,
}

struct Batch {
    x: Vec<f64>,
    y: Vec<usize>,
    n: usize,
    dim: usize,
    k: usize,
}

impl Batch {
    /// Mean cross-entropy plus the `0.5 * l2 * |W|^2` ridge term.
    fn loss(&self, w: &[f64], b: &[f64], l2: f64) -> f64 {
        let mut total = 0.0;
        let mut z = vec![0.0; self.k];
        for i in 0..self.n {
            let x = &self.x[i * self.dim..(i + 1) * self.dim];
            for (c, zc) in z.iter_mut().enumerate() {
                let row = &w[c * self.dim..(c + 1) * self.dim];
                *zc = b[c] + row.iter().zip(x).map(|(wj, xj)| wj * xj).sum::<f64>();
            }
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            total += lse - z[self.y[i]];
        }
        total / self.n as f64 + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn loss_and_grad(&self, w: &[f64], b: &[f64], l2: f64) -> (f64, Vec<f64>, Vec<f64>) {
        let mut gw = vec![0.0; w.len()];
        let mut gb = vec![0.0; b.len()];
        let mut total = 0.0;
        let mut z = vec![0.0; self.k];
        let inv_n = 1.0 / self.n as f64;
        for i in 0..self.n {
            let x = &self.x[i * self.dim..(i + 1) * self.dim];
            for (c, zc) in z.iter_mut().enumerate() {
                let row = &w[c * self.dim..(c + 1) * self.dim];
                *zc = b[c] + row.iter().zip(x).map(|(wj, xj)| wj * xj).sum::<f64>();
            }
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            total += lse - z[self.y[i]];
            for c in 0..self.k {
                let mut p = (z[c] - lse).exp();
                if c == self.y[i] {
                    p -= 1.0;
                }
                let coeff = p * inv_n;
                gb[c] += coeff;
                let grow = &mut gw[c * self.dim..(c + 1) * self.dim];
                for (gj, xj) in grow.iter_mut().zip(x) {
                    *gj += coeff * xj;
                }
            }
        }
        for (gj, wj) in gw.iter_mut().zip(w) {
            *gj += l2 * wj;
        }
        let loss = total * inv_n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
        (loss, gw, gb)
    }
}

/// Fits the classifier by full-batch gradient descent from zero weights.
///
/// Each epoch takes one descent step whose length is found by backtracking:
/// the step is halved until the objective satisfies an Armijo decrease, so
/// the recorded loss sequence never increases. Training is deterministic.
pub fn train_classifier(
    embeddings: &[Embedding],
    labels: &[String],
    params: &TrainParams,
) -> Result<(LogisticModel, TrainReport)> {
    if embeddings.len() != labels.len() {
        return Err(Error::InvalidParameter(
            "embedding and label counts differ".into(),
        ));
    }
    if embeddings.is_empty() {
        return Err(Error::InvalidParameter("no training samples".into()));
    }
    if !(params.l2.is_finite() && params.l2 >= 0.0) || !(params.grad_tol > 0.0) {
        return Err(Error::InvalidParameter("bad training hyperparameters".into()));
    }
    let dim = embeddings[0].len();
    for e in embeddings {
        if e.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: e.len(),
            });
        }
    }

    let mut class_labels: Vec<String> = labels.to_vec();
    class_labels.sort();
    class_labels.dedup();
    if class_labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    let class_index = |label: &String| class_labels.binary_search(label).unwrap();

    let batch = Batch {
        x: embeddings
            .iter()
            .flat_map(|e| e.values().iter().map(|&v| v as f64))
            .collect(),
        y: labels.iter().map(class_index).collect(),
        n: embeddings.len(),
        dim,
        k: class_labels.len(),
    };

    let mut w = vec![0.0; batch.k * dim];
    let mut b = vec![0.0; batch.k];
    let mut step = 1.0;
    let mut losses = Vec::new();
    let mut epochs = 0;
    let mut grad_norm = f64::INFINITY;

    for _ in 0..params.max_epochs {
        let (loss, gw, gb) = batch.loss_and_grad(&w, &b, params.l2);
        if losses.is_empty() {
            losses.push(loss);
        }
        let g2 = gw.iter().chain(&gb).map(|g| g * g).sum::<f64>();
        grad_norm = g2.sqrt();
        if grad_norm < params.grad_tol {
            break;
        }

        let mut accepted = None;
        while step > 1e-18 {
            let wc: Vec<f64> = w.iter().zip(&gw).map(|(wj, gj)| wj - step * gj).collect();
            let bc: Vec<f64> = b.iter().zip(&gb).map(|(bj, gj)| bj - step * gj).collect();
            let candidate = batch.loss(&wc, &bc, params.l2);
            if candidate <= loss - 1e-4 * step * g2 {
                accepted = Some((wc, bc, candidate));
                break;
            }
            step *= 0.5;
        }
        let Some((wc, bc, new_loss)) = accepted else {
            break;
        };
        debug_assert!(new_loss <= losses.last().copied().unwrap_or(f64::INFINITY));
        w = wc;
        b = bc;
        losses.push(new_loss);
        epochs += 1;
        step = (step * 1.5).min(1e3);
    }

    let model = LogisticModel::from_parts(
        class_labels,
        dim,
        w.iter().map(|&v| v as f32).collect(),
        b.iter().map(|&v| v as f32).collect(),
    )?;
    Ok((
        model,
        TrainReport {
            epochs,
            losses,
            final_grad_norm: grad_norm,
        },
    ))
}

/// Scores one embedding and returns the winning label with the class
/// posterior. Ties pick the lowest class index, so the result is total.
pub fn predict(model: &LogisticModel, embedding: &Embedding) -> Result<(String, Vec<f64>)> {
    if embedding.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: embedding.len(),
        });
    }
    let k = model.class_labels.len();
    let mut z = vec![0.0f64; k];
    for (c, zc) in z.iter_mut().enumerate() {
        let row = &model.weights[c * model.dim..(c + 1) * model.dim];
        *zc = model.biases[c] as f64
            + row
                .iter()
                .zip(embedding.values())
                .map(|(&wj, &xj)| wj as f64 * xj as f64)
                .sum::<f64>();
    }
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = z.iter().map(|v| (v - m).exp()).sum();
    let probabilities: Vec<f64> = z.iter().map(|v| (v - m).exp() / denom).collect();

    let mut best = 0;
    for (c, &p) in probabilities.iter().enumerate() {
        if p > probabilities[best] {
            best = c;
        }
    }
    Ok((model.class_labels[best].clone(), probabilities))
}
