//! Grayscale image obfuscation via matrix decomposition, with privacy
//! metrics, simulated attacks, and a utility probe.
//!
//! The pipeline treats an image as a matrix I = U·S·V^H and hides content by
//! discarding S (keeping U, V^H, or their sum) or by PCA projection onto a
//! shared basis, optionally with a fixed random shuffle of the coefficients
//! and a random pixel perturbation that defeats re-identification. SSIM and
//! PSNR quantify the privacy gained; ridge-regression reconstruction attacks
//! and a linear classifier quantify what an adversary and a legitimate model
//! can still extract.

pub mod attacks;
pub mod cli;
pub mod dataset;
pub mod decomp;
pub mod error;
pub mod fsutil;
pub mod image;
mod linalg;
pub mod metrics;
pub mod obf1;
pub mod obfuscate;
pub mod pgm;
pub mod probe;
pub mod rng;

pub use dataset::{generate_synthetic, split_dataset, LabeledDataset, SplitSpec};
pub use decomp::{fit_pca, pca_project, pca_reconstruct, svd, svd_reconstruct, PcaBasis, SvdFactors};
pub use error::{Error, Result};
pub use image::{minmax_normalize, resize_bilinear, ImageMatrix};
pub use metrics::{privacy_report, psnr, ssim, PrivacyReport};
pub use obfuscate::{
    make_permutation, obfuscate_batch, obfuscate_pca, obfuscate_svd, perturb_pixels, Method,
    ObfuscationPolicy, Permutation,
};
