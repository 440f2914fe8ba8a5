//! Privacy quantification: SSIM and PSNR between image pairs, plus aggregate
//! reporting with CSV output.
//!
//! SSIM uses the original parameterization: 11x11 Gaussian window (sigma
//! 1.5), K1 = 0.01, K2 = 0.03, dynamic range 1.0. Unbounded matrices are
//! min-max normalized before either metric is computed.

use std::borrow::Cow;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{minmax_normalize, ImageMatrix};

const K1: f64 = 0.01;
const K2: f64 = 0.03;
const DYNAMIC_RANGE: f64 = 1.0;
const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;

fn normalized(img: &ImageMatrix) -> Cow<'_, ImageMatrix> {
    if img.unbounded {
        Cow::Owned(minmax_normalize(img))
    } else {
        Cow::Borrowed(img)
    }
}

fn check_dims(a: &ImageMatrix, b: &ImageMatrix) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::Domain(format!(
            "image dims {:?} vs {:?} do not match",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

fn gaussian_kernel(side: usize) -> Vec<f64> {
    let c = (side as f64 - 1.0) / 2.0;
    let mut k: Vec<f64> = (0..side * side)
        .map(|i| {
            let (r, cidx) = (i / side, i % side);
            let dr = r as f64 - c;
            let dc = cidx as f64 - c;
            (-(dr * dr + dc * dc) / (2.0 * SIGMA * SIGMA)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Mean local SSIM over Gaussian-weighted sliding windows.
///
/// Windows are fully contained in the image; for images smaller than 11
/// pixels on a side the window shrinks to the smaller dimension.
pub fn ssim(a: &ImageMatrix, b: &ImageMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let a = normalized(a);
    let b = normalized(b);
    let (h, w) = a.dims();
    let side = WINDOW.min(h).min(w);
    let kernel = gaussian_kernel(side);
    let c1 = (K1 * DYNAMIC_RANGE).powi(2);
    let c2 = (K2 * DYNAMIC_RANGE).powi(2);

    let mut total = 0.0;
    let mut count = 0usize;
    for r0 in 0..=(h - side) {
        for c0 in 0..=(w - side) {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            let mut aa = 0.0;
            let mut bb = 0.0;
            let mut ab = 0.0;
            for kr in 0..side {
                for kc in 0..side {
                    let wgt = kernel[kr * side + kc];
                    let x = a.at(r0 + kr, c0 + kc);
                    let y = b.at(r0 + kr, c0 + kc);
                    mu_a += wgt * x;
                    mu_b += wgt * y;
                    aa += wgt * x * x;
                    bb += wgt * y * y;
                    ab += wgt * (x * y);
                }
            }
            let var_a = aa - mu_a * mu_a;
            let var_b = bb - mu_b * mu_b;
            let cov = ab - mu_a * mu_b;
            let s = ((2.0 * (mu_a * mu_b) + c1) * (2.0 * cov + c2))
                / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            total += s;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// 10 * log10(1 / MSE) in dB with MAX = 1.0; identical images give +inf.
pub fn psnr(a: &ImageMatrix, b: &ImageMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let a = normalized(a);
    let b = normalized(b);
    let mse: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.len() as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (DYNAMIC_RANGE * DYNAMIC_RANGE / mse).log10())
    }
}

/// Per-pair and aggregate SSIM/PSNR between two equally long image lists.
#[derive(Debug, Clone)]
pub struct PrivacyReport {
    pub pair_ssim: Vec<f64>,
    pub pair_psnr: Vec<f64>,
    pub mean_ssim: f64,
    pub std_ssim: f64,
    /// mean over finite PSNR entries; +inf when every pair is identical,
    /// NaN for an empty report
    pub mean_psnr: f64,
    pub count: usize,
}

pub fn privacy_report(originals: &[ImageMatrix], others: &[ImageMatrix]) -> Result<PrivacyReport> {
    if originals.len() != others.len() {
        return Err(Error::Domain(format!(
            "list lengths differ: {} vs {}",
            originals.len(),
            others.len()
        )));
    }
    let pairs: Vec<(f64, f64)> = originals
        .par_iter()
        .zip(others.par_iter())
        .map(|(a, b)| Ok((ssim(a, b)?, psnr(a, b)?)))
        .collect::<Result<_>>()?;
    let pair_ssim: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let pair_psnr: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(PrivacyReport::from_pairs(pair_ssim, pair_psnr))
}

impl PrivacyReport {
    pub fn from_pairs(pair_ssim: Vec<f64>, pair_psnr: Vec<f64>) -> Self {
        let count = pair_ssim.len();
        let (mean_ssim, std_ssim) = if count == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let mean = pair_ssim.iter().sum::<f64>() / count as f64;
            let var = pair_ssim.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / count as f64;
            (mean, var.sqrt())
        };
        let finite: Vec<f64> = pair_psnr.iter().copied().filter(|p| p.is_finite()).collect();
        let mean_psnr = if count == 0 {
            f64::NAN
        } else if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        PrivacyReport {
            pair_ssim,
            pair_psnr,
            mean_ssim,
            std_ssim,
            mean_psnr,
            count,
        }
    }

    /// CSV rows `index,ssim,psnr_db` plus a trailing aggregate comment line.
    /// Floats print as shortest round-trip decimals; +inf prints as "inf".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,ssim,psnr_db\n");
        for (i, (s, p)) in self.pair_ssim.iter().zip(&self.pair_psnr).enumerate() {
            out.push_str(&format!("{i},{s},{p}\n"));
        }
        out.push_str(&format!(
            "# mean_ssim={},std_ssim={},mean_psnr={}\n",
            self.mean_ssim, self.std_ssim, self.mean_psnr
        ));
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::fsutil::write_atomic(path, self.to_csv().as_bytes())
    }
}
