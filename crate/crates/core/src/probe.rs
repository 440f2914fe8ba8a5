//! Utility probe: a seeded multinomial logistic-regression classifier used
//! to measure how much class-discriminative information survives
//! obfuscation.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::image::ImageMatrix;
use crate::rng::{mix_seed, seeded_rng};

#[derive(Debug, Clone)]
pub struct LinearClassifier {
    /// C × D, row-major
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub classes: usize,
    pub input_dim: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 0.05,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be > 0".into()));
        }
        if self.l2 < 0.0 {
            return Err(Error::Config("l2 must be >= 0".into()));
        }
        Ok(())
    }
}

/// Mini-batch SGD on softmax cross-entropy with L2; returns the parameters
/// of the best validation epoch. Deterministic for a fixed config.
pub fn train_classifier(
    train: &LabeledDataset,
    val: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<LinearClassifier> {
    train_with_history(train, val, cfg).map(|(clf, _)| clf)
}

/// As [`train_classifier`], also returning the mean training loss recorded
/// after each epoch.
pub fn train_with_history(
    train: &LabeledDataset,
    val: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<(LinearClassifier, Vec<f64>)> {
    cfg.validate()?;
    if train.dims() != val.dims() {
        return Err(Error::Domain("train/val image dimensions differ".into()));
    }
    let classes = train.n_classes().max(val.n_classes());
    let distinct = {
        let mut seen = vec![false; classes];
        train.labels.iter().for_each(|&l| seen[l] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(Error::Config(
            "training set must contain at least two classes".into(),
        ));
    }
    let (h, w) = train.dims();
    let d = h * w;
    let mut clf = LinearClassifier {
        weights: vec![0.0; classes * d],
        bias: vec![0.0; classes],
        classes,
        input_dim: d,
    };
    let mut best = (clf.clone(), -1.0f64);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut indices: Vec<usize> = (0..train.len()).collect();
    let mut probs = vec![0.0f64; classes];

    for epoch in 0..cfg.epochs {
        let mut rng = seeded_rng(mix_seed(cfg.seed, epoch as u64));
        indices.shuffle(&mut rng);
        for batch in indices.chunks(cfg.batch_size) {
            let scale = cfg.learning_rate / batch.len() as f64;
            let mut grad_w = vec![0.0f64; classes * d];
            let mut grad_b = vec![0.0f64; classes];
            for &i in batch {
                let img = &train.images[i];
                softmax_into(&clf, img, &mut probs);
                for c in 0..classes {
                    let delta = probs[c] - if c == train.labels[i] { 1.0 } else { 0.0 };
                    grad_b[c] += delta;
                    let row = &mut grad_w[c * d..(c + 1) * d];
                    for (g, x) in row.iter_mut().zip(&img.values) {
                        *g += delta * x;
                    }
                }
            }
            for (wgt, g) in clf.weights.iter_mut().zip(&grad_w) {
                *wgt -= scale * (g + cfg.l2 * *wgt * batch.len() as f64);
            }
            for (b, g) in clf.bias.iter_mut().zip(&grad_b) {
                *b -= scale * g;
            }
        }
        history.push(mean_loss(&clf, train));
        let (acc, _) = evaluate(&clf, val)?;
        if acc > best.1 {
            best = (clf.clone(), acc);
        }
    }
    Ok((best.0, history))
}

fn softmax_into(clf: &LinearClassifier, img: &ImageMatrix, out: &mut [f64]) {
    logits_into(clf, img, out);
    let max = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in out.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
}

fn logits_into(clf: &LinearClassifier, img: &ImageMatrix, out: &mut [f64]) {
    let d = clf.input_dim;
    for c in 0..clf.classes {
        let row = &clf.weights[c * d..(c + 1) * d];
        out[c] = clf.bias[c] + row.iter().zip(&img.values).map(|(w, x)| w * x).sum::<f64>();
    }
}

/// Argmax of the logits; ties break to the lowest class id.
pub fn predict(clf: &LinearClassifier, image: &ImageMatrix) -> Result<usize> {
    if image.len() != clf.input_dim {
        return Err(Error::Domain(format!(
            "image size {} does not match classifier input {}",
            image.len(),
            clf.input_dim
        )));
    }
    let mut logits = vec![0.0f64; clf.classes];
    logits_into(clf, image, &mut logits);
    let mut best = 0usize;
    for (c, &v) in logits.iter().enumerate() {
        if v > logits[best] {
            best = c;
        }
    }
    Ok(best)
}

/// Accuracy plus a C×C confusion matrix (rows: true class, cols: predicted).
pub fn evaluate(clf: &LinearClassifier, test: &LabeledDataset) -> Result<(f64, Vec<Vec<usize>>)> {
    let mut confusion = vec![vec![0usize; clf.classes]; clf.classes];
    let mut correct = 0usize;
    for (img, &label) in test.images.iter().zip(&test.labels) {
        let pred = predict(clf, img)?;
        if label >= clf.classes {
            return Err(Error::Domain(format!(
                "label {label} outside classifier range {}",
                clf.classes
            )));
        }
        confusion[label][pred] += 1;
        if pred == label {
            correct += 1;
        }
    }
    Ok((correct as f64 / test.len() as f64, confusion))
}

/// Mean softmax cross-entropy over a dataset, used by monotonicity checks.
pub fn mean_loss(clf: &LinearClassifier, ds: &LabeledDataset) -> f64 {
    let mut probs = vec![0.0f64; clf.classes];
    let mut total = 0.0;
    for (img, &label) in ds.images.iter().zip(&ds.labels) {
        softmax_into(clf, img, &mut probs);
        total -= probs[label].max(1e-300).ln();
    }
    total / ds.len() as f64
}

// ---------------------------------------------------------------------------
// CLF1 binary format: magic "CLF1"; C, D as 4-byte LE unsigned; weights
// (C×D f64 LE) then bias (C f64 LE).

pub const CLF_MAGIC: &[u8; 4] = b"CLF1";

pub fn encode_clf(clf: &LinearClassifier) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + (clf.weights.len() + clf.bias.len()) * 8);
    out.extend_from_slice(CLF_MAGIC);
    out.extend_from_slice(&(clf.classes as u32).to_le_bytes());
    out.extend_from_slice(&(clf.input_dim as u32).to_le_bytes());
    for v in clf.weights.iter().chain(clf.bias.iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_clf(bytes: &[u8]) -> Result<LinearClassifier> {
    if bytes.len() < 12 || &bytes[0..4] != CLF_MAGIC {
        return Err(Error::format("bad CLF1 header", 0));
    }
    let classes = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let input_dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = 12 + (classes * input_dim + classes) * 8;
    if bytes.len() != expected {
        return Err(Error::format(
            format!("file length {} does not match header ({expected})", bytes.len()),
            12,
        ));
    }
    let floats: Vec<f64> = bytes[12..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (weights, bias) = floats.split_at(classes * input_dim);
    Ok(LinearClassifier {
        weights: weights.to_vec(),
        bias: bias.to_vec(),
        classes,
        input_dim,
    })
}

pub fn save_clf(clf: &LinearClassifier, path: &Path) -> Result<()> {
    crate::fsutil::write_atomic(path, &encode_clf(clf))
}

pub fn load_clf(path: &Path) -> Result<LinearClassifier> {
    decode_clf(&fs::read(path)?)
}
