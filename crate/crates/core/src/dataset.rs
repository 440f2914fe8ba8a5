//! Labeled image collections: splitting, synthetic generation and on-disk
//! dataset directories (image files plus a JSON manifest).

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageMatrix;
use crate::obfuscate::ObfuscationMeta;
use crate::rng::{mix_seed, seeded_rng};
use crate::{obf1, pgm};

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub images: Vec<ImageMatrix>,
    pub labels: Vec<usize>,
    pub name: String,
}

impl LabeledDataset {
    pub fn new(images: Vec<ImageMatrix>, labels: Vec<usize>, name: impl Into<String>) -> Result<Self> {
        if images.is_empty() || images.len() != labels.len() {
            return Err(Error::Domain(format!(
                "need equal non-zero image/label counts, got {}/{}",
                images.len(),
                labels.len()
            )));
        }
        let dims = images[0].dims();
        if images.iter().any(|img| img.dims() != dims) {
            return Err(Error::Domain("all images must share dimensions".into()));
        }
        Ok(LabeledDataset {
            images,
            labels,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.images[0].dims()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    fn subset(&self, indices: &[usize], name: String) -> LabeledDataset {
        LabeledDataset {
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            name,
        }
    }
}

/// Train/val/test ratios; must be positive and sum to 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_fraction, self.val_fraction, self.test_fraction];
        if fracs.iter().any(|&f| f <= 0.0) {
            return Err(Error::Config("split fractions must be > 0".into()));
        }
        if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("split fractions must sum to 1".into()));
        }
        Ok(())
    }
}

/// Stratified split: per class, a seeded shuffle followed by a contiguous
/// partition with largest-remainder rounding.
pub fn split_dataset(
    ds: &LabeledDataset,
    spec: &SplitSpec,
) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let n_classes = ds.n_classes();
    let mut split_indices: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for class in 0..n_classes {
        let mut idx: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        let mut rng = seeded_rng(mix_seed(spec.seed, class as u64));
        idx.shuffle(&mut rng);
        let counts = largest_remainder(
            idx.len(),
            [spec.train_fraction, spec.val_fraction, spec.test_fraction],
        );
        let mut start = 0;
        for (slot, &count) in counts.iter().enumerate() {
            split_indices[slot].extend_from_slice(&idx[start..start + count]);
            start += count;
        }
    }
    if split_indices.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(
            "split fractions leave an empty train/val/test subset".into(),
        ));
    }
    for s in split_indices.iter_mut() {
        s.sort_unstable();
    }
    let [train, val, test] = split_indices;
    Ok((
        ds.subset(&train, format!("{}-train", ds.name)),
        ds.subset(&val, format!("{}-val", ds.name)),
        ds.subset(&test, format!("{}-test", ds.name)),
    ))
}

fn largest_remainder(total: usize, fracs: [f64; 3]) -> [usize; 3] {
    let mut counts = [0usize; 3];
    let mut rems: Vec<(usize, f64)> = Vec::with_capacity(3);
    let mut assigned = 0;
    for (i, &f) in fracs.iter().enumerate() {
        let exact = total as f64 * f;
        counts[i] = exact.floor() as usize;
        assigned += counts[i];
        rems.push((i, exact - exact.floor()));
    }
    // ties resolved in train < val < test order (stable sort by remainder)
    rems.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for k in 0..(total - assigned) {
        counts[rems[k].0] += 1;
    }
    counts
}

/// Stroke geometry used by the synthetic generators.
#[derive(Debug, Clone, Copy)]
enum StrokeStyle {
    /// class 0: curved diagonal, class 1: horizontal
    Standard,
    /// class 0: curved anti-diagonal, class 1: vertical
    Shifted,
}

/// Two-class synthetic grayscale set: bright strokes on a dark background
/// with additive Gaussian noise clipped to [0, 1]. Fully seeded.
pub fn generate_synthetic(
    n_per_class: usize,
    h: usize,
    w: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    synthetic_with_style(n_per_class, h, w, noise_sigma, seed, StrokeStyle::Standard, "synthetic")
}

/// A generator with different stroke geometry, used as the shifted-distribution
/// attacker training data.
pub fn generate_synthetic_shifted(
    n_per_class: usize,
    h: usize,
    w: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    synthetic_with_style(n_per_class, h, w, noise_sigma, seed, StrokeStyle::Shifted, "synthetic-shifted")
}

fn synthetic_with_style(
    n_per_class: usize,
    h: usize,
    w: usize,
    noise_sigma: f64,
    seed: u64,
    style: StrokeStyle,
    name: &str,
) -> Result<LabeledDataset> {
    if n_per_class == 0 {
        return Err(Error::Config("n_per_class must be >= 1".into()));
    }
    if h == 0 || w == 0 {
        return Err(Error::Config("image dimensions must be >= 1".into()));
    }
    let mut images = Vec::with_capacity(2 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for class in 0..2usize {
        for item in 0..n_per_class {
            let item_seed = mix_seed(seed, (class * n_per_class + item) as u64);
            images.push(synthetic_image(h, w, noise_sigma, class, style, item_seed));
            labels.push(class);
        }
    }
    LabeledDataset::new(images, labels, name)
}

fn synthetic_image(
    h: usize,
    w: usize,
    noise_sigma: f64,
    class: usize,
    style: StrokeStyle,
    seed: u64,
) -> ImageMatrix {
    const BACKGROUND: f64 = 0.1;
    const STROKE: f64 = 1.0;
    const THICKNESS: f64 = 0.8;

    let mut rng = seeded_rng(seed);
    let mut img = ImageMatrix {
        height: h,
        width: w,
        values: vec![BACKGROUND; h * w],
        unbounded: false,
    };

    let span = |n: usize| (n.max(2) - 1) as f64;
    let amp = rng.gen_range(0.04..0.10) * h as f64;
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let offset = rng.gen_range(0.3..0.7);

    // stroke path: for each sweep position, a transverse center coordinate
    let transverse_along_rows = matches!(
        (style, class),
        (StrokeStyle::Standard, _) | (StrokeStyle::Shifted, 0)
    );
    let sweep_len = if transverse_along_rows { w } else { h };
    let trans_len = if transverse_along_rows { h } else { w };
    for s in 0..sweep_len {
        let t = s as f64 / span(sweep_len);
        let center = match (style, class) {
            // diagonal polyline with a sinusoidal bend
            (StrokeStyle::Standard, 0) => {
                t * span(trans_len) + amp * (std::f64::consts::TAU * t + phase).sin()
            }
            // horizontal stroke at a jittered row
            (StrokeStyle::Standard, _) => offset * span(trans_len),
            // anti-diagonal bend
            (StrokeStyle::Shifted, 0) => {
                (1.0 - t) * span(trans_len) + amp * (std::f64::consts::TAU * t + phase).sin()
            }
            // vertical stroke at a jittered column
            (StrokeStyle::Shifted, _) => offset * span(trans_len),
        };
        let center = center.clamp(0.0, span(trans_len));
        for u in 0..trans_len {
            let d = u as f64 - center;
            let fall = (-d * d / (2.0 * THICKNESS * THICKNESS)).exp();
            let v = BACKGROUND + (STROKE - BACKGROUND) * fall;
            let (r, c) = if transverse_along_rows { (u, s) } else { (s, u) };
            let px = img.at_mut(r, c);
            if v > *px {
                *px = v;
            }
        }
    }

    if noise_sigma > 0.0 {
        for v in img.values.iter_mut() {
            *v = (*v + noise_sigma * gauss(&mut rng)).clamp(0.0, 1.0);
        }
    }
    img
}

/// Box-Muller standard normal draw.
fn gauss<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

// ---------------------------------------------------------------------------
// Dataset directories

/// JSON manifest stored next to a dataset's image files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub files: Vec<String>,
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obfuscation: Option<ObfuscationMeta>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Obf1,
}

/// Writes every image plus `manifest.json` into `dir`.
pub fn save_dataset(
    ds: &LabeledDataset,
    dir: &Path,
    format: ImageFormat,
    obfuscation: Option<ObfuscationMeta>,
) -> Result<DatasetManifest> {
    fs::create_dir_all(dir)?;
    let ext = match format {
        ImageFormat::Pgm => "pgm",
        ImageFormat::Obf1 => "obf1",
    };
    let mut files = Vec::with_capacity(ds.len());
    for (i, img) in ds.images.iter().enumerate() {
        let file = format!("img_{i:05}.{ext}");
        let path = dir.join(&file);
        match format {
            ImageFormat::Pgm => pgm::save_pgm(img, &path)?,
            ImageFormat::Obf1 => obf1::write_obf1(img, &path)?,
        }
        files.push(file);
    }
    let manifest = DatasetManifest {
        name: ds.name.clone(),
        files,
        labels: ds.labels.clone(),
        obfuscation,
    };
    let json = serde_json::to_vec_pretty(&manifest)?;
    crate::fsutil::write_atomic(&dir.join(MANIFEST_FILE), &json)?;
    Ok(manifest)
}

/// Loads a dataset directory written by [`save_dataset`]; file format is
/// chosen per file by extension.
pub fn load_dataset(dir: &Path) -> Result<(LabeledDataset, DatasetManifest)> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: DatasetManifest = serde_json::from_slice(&fs::read(&manifest_path)?)?;
    if manifest.files.len() != manifest.labels.len() {
        return Err(Error::Format {
            msg: format!(
                "manifest lists {} files but {} labels",
                manifest.files.len(),
                manifest.labels.len()
            ),
            offset: 0,
        });
    }
    let mut images = Vec::with_capacity(manifest.files.len());
    for file in &manifest.files {
        let path = dir.join(file);
        let img = if file.ends_with(".obf1") {
            obf1::read_obf1(&path)?
        } else {
            pgm::load_pgm(&path)?
        };
        images.push(img);
    }
    let ds = LabeledDataset::new(images, manifest.labels.clone(), manifest.name.clone())?;
    Ok((ds, manifest))
}
