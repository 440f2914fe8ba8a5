//! Obfuscation methods: the three SVD variants, PCA, PCA with shuffled
//! components, and the optional random pixel perturbation that removes
//! determinism before decomposition.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::decomp::{self, PcaBasis};
use crate::error::{Error, Result};
use crate::image::ImageMatrix;
use crate::rng::{mix_seed, seeded_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SvdU,
    SvdVh,
    SvdSum,
    Pca,
    PcaSc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SvdU => "svd-u",
            Method::SvdVh => "svd-vh",
            Method::SvdSum => "svd-sum",
            Method::Pca => "pca",
            Method::PcaSc => "pca-sc",
        }
    }

    pub fn is_pca(&self) -> bool {
        matches!(self, Method::Pca | Method::PcaSc)
    }

    pub const ALL: [Method; 5] = [
        Method::SvdU,
        Method::SvdVh,
        Method::SvdSum,
        Method::Pca,
        Method::PcaSc,
    ];
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Batch obfuscation policy shared by the data owner and any simulated
/// attacker.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObfuscationPolicy {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_components: Option<usize>,
    #[serde(default)]
    pub randomize: bool,
    pub master_seed: u64,
}

impl ObfuscationPolicy {
    /// Checks policy/basis consistency before any work starts.
    pub fn validate(&self, basis: Option<&PcaBasis>) -> Result<()> {
        if self.method.is_pca() {
            let basis = basis.ok_or_else(|| {
                Error::Config(format!("method {} requires a fitted PCA basis", self.method))
            })?;
            if let Some(n) = self.n_components {
                if n != basis.n {
                    return Err(Error::Config(format!(
                        "policy n_components {n} does not match basis n {}",
                        basis.n
                    )));
                }
            }
        } else if basis.is_some() {
            return Err(Error::Config(format!(
                "method {} does not take a PCA basis",
                self.method
            )));
        }
        Ok(())
    }
}

/// Obfuscation parameters recorded in dataset manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObfuscationMeta {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_components: Option<usize>,
    pub randomize: bool,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
}

/// A fixed bijection on coefficient indices, shared across a whole dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub mapping: Vec<usize>,
    pub seed: u64,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            mapping: (0..n).collect(),
            seed: 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// out[i] = coeffs[mapping[i]]
    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        self.mapping.iter().map(|&m| coeffs[m]).collect()
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0usize; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Permutation {
            mapping: inv,
            seed: self.seed,
        }
    }
}

/// Seeded Fisher-Yates shuffle of 0..n.
pub fn make_permutation(n: usize, seed: u64) -> Permutation {
    let mut mapping: Vec<usize> = (0..n).collect();
    let mut rng = seeded_rng(seed);
    mapping.shuffle(&mut rng);
    Permutation { mapping, seed }
}

/// Replaces one uniformly chosen pixel in each of max(1, floor(H/3))
/// uniformly chosen distinct rows with a uniform value in [0, 1].
pub fn perturb_pixels(image: &ImageMatrix, seed: u64) -> ImageMatrix {
    let mut rng = seeded_rng(seed);
    let h = image.height;
    let k = (h / 3).max(1).min(h);
    let mut rows: Vec<usize> = (0..h).collect();
    // partial Fisher-Yates: first k entries are the selection
    for i in 0..k {
        let j = rng.gen_range(i..h);
        rows.swap(i, j);
    }
    let mut out = image.clone();
    for &row in &rows[..k] {
        let col = rng.gen_range(0..image.width);
        *out.at_mut(row, col) = rng.gen::<f64>();
    }
    out
}

/// SVD variant selector: which factor(s) become the obfuscated image.
pub fn obfuscate_svd(image: &ImageMatrix, variant: Method) -> Result<ImageMatrix> {
    if variant == Method::SvdSum && image.height != image.width {
        return Err(Error::Config(format!(
            "svd-sum requires square images, got {}x{}",
            image.height, image.width
        )));
    }
    let f = decomp::svd(image)?;
    let out = match variant {
        Method::SvdU => f.u,
        Method::SvdVh => f.v_h,
        Method::SvdSum => {
            let mut sum = f.u;
            for (a, b) in sum.values.iter_mut().zip(&f.v_h.values) {
                *a += b;
            }
            sum
        }
        other => {
            return Err(Error::Config(format!(
                "obfuscate_svd called with non-SVD method {other}"
            )))
        }
    };
    Ok(out)
}

/// Project, permute the coefficient pairing, reconstruct. The identity
/// permutation gives plain PCA obfuscation.
pub fn obfuscate_pca(
    basis: &PcaBasis,
    image: &ImageMatrix,
    perm: &Permutation,
) -> Result<ImageMatrix> {
    if perm.mapping.len() != basis.n {
        return Err(Error::Domain(format!(
            "permutation length {} does not match basis n {}",
            perm.mapping.len(),
            basis.n
        )));
    }
    let coeffs = decomp::pca_project(basis, image)?;
    let shuffled = decomp::CoefficientVector {
        coeffs: perm.apply(&coeffs.coeffs),
    };
    decomp::pca_reconstruct(basis, &shuffled)
}

/// Applies the policy to a whole dataset.
///
/// The PCA-SC permutation is drawn once from the master seed and reused for
/// every image. Per-item perturbation seeds are mix_seed(master_seed, index),
/// so the output does not depend on processing order or thread count.
pub fn obfuscate_batch(
    policy: &ObfuscationPolicy,
    basis: Option<&PcaBasis>,
    ds: &LabeledDataset,
) -> Result<LabeledDataset> {
    policy.validate(basis)?;
    let perm = batch_permutation(policy, basis);
    let images: Vec<ImageMatrix> = ds
        .images
        .par_iter()
        .enumerate()
        .map(|(i, img)| obfuscate_item(policy, basis, perm.as_ref(), img, i))
        .collect::<Result<_>>()?;
    Ok(LabeledDataset {
        images,
        labels: ds.labels.clone(),
        name: format!("{}-{}", ds.name, policy.method),
    })
}

/// The dataset-wide permutation implied by a policy (None for SVD methods;
/// identity for plain PCA).
pub fn batch_permutation(
    policy: &ObfuscationPolicy,
    basis: Option<&PcaBasis>,
) -> Option<Permutation> {
    match (policy.method, basis) {
        (Method::PcaSc, Some(b)) => Some(make_permutation(b.n, policy.master_seed)),
        (Method::Pca, Some(b)) => Some(Permutation::identity(b.n)),
        _ => None,
    }
}

/// Single-image pipeline: optional perturbation, then the method.
pub fn obfuscate_item(
    policy: &ObfuscationPolicy,
    basis: Option<&PcaBasis>,
    perm: Option<&Permutation>,
    image: &ImageMatrix,
    index: usize,
) -> Result<ImageMatrix> {
    let perturbed;
    let input = if policy.randomize {
        perturbed = perturb_pixels(image, mix_seed(policy.master_seed, index as u64));
        &perturbed
    } else {
        image
    };
    match policy.method {
        Method::SvdU | Method::SvdVh | Method::SvdSum => obfuscate_svd(input, policy.method),
        Method::Pca | Method::PcaSc => {
            let basis = basis.expect("validated");
            let perm = perm.expect("validated");
            obfuscate_pca(basis, input, perm)
        }
    }
}

impl ObfuscationMeta {
    pub fn from_policy(policy: &ObfuscationPolicy, perm: Option<&Permutation>) -> Self {
        ObfuscationMeta {
            method: policy.method,
            n_components: policy.n_components,
            randomize: policy.randomize,
            master_seed: policy.master_seed,
            permutation: perm.map(|p| p.mapping.clone()),
        }
    }
}
