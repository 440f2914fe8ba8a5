//! Threat-actor simulations: deterministic re-identification matching and a
//! learned reconstruction attack with a ridge-regression model.
//!
//! The attacker follows the intercept protocol: obfuscate their own data
//! with the same technique, train a model mapping obfuscated to original,
//! then run it on the intercepted frames. The attacker never sees the data
//! owner's PCA basis, permutation, or seeds.

use serde::{Deserialize, Serialize};

use crate::dataset::{generate_synthetic, generate_synthetic_shifted, LabeledDataset};
use crate::decomp::{fit_pca, PcaBasis};
use crate::error::{Error, Result};
use crate::image::ImageMatrix;
use crate::linalg::{cholesky_solve, Mat};
use crate::metrics::{privacy_report, PrivacyReport};
use crate::obfuscate::{obfuscate_batch, obfuscate_item, batch_permutation, ObfuscationPolicy};
use crate::rng::mix_seed;

pub const DEFAULT_LAMBDA: f64 = 1e-2;

/// Linear reconstruction model solved in closed form from (obfuscated,
/// original) training pairs.
#[derive(Debug, Clone)]
pub struct RidgeAttacker {
    /// D_out × D_in, row-major
    pub weights: Vec<f64>,
    pub intercept: Vec<f64>,
    pub lambda: f64,
    pub in_dims: (usize, usize),
    pub out_dims: (usize, usize),
}

/// Outcome of matching one probe against an obfuscated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReidResult {
    pub probe_index: usize,
    pub exact_match: bool,
    /// 1-based rank of the true counterpart under Euclidean distance
    pub nn_rank: usize,
    /// distance to the true counterpart minus distance to the nearest entry
    pub distance_gap: f64,
}

/// Solves (Xt X + lambda I) W = Xt Y on mean-centered flattened pairs.
pub fn train_ridge_attacker(
    obf: &[ImageMatrix],
    orig: &[ImageMatrix],
    lambda: f64,
) -> Result<RidgeAttacker> {
    if obf.len() != orig.len() || obf.len() < 2 {
        return Err(Error::Domain(format!(
            "need equal pair counts >= 2, got {}/{}",
            obf.len(),
            orig.len()
        )));
    }
    if lambda <= 0.0 {
        return Err(Error::Config("lambda must be > 0".into()));
    }
    let in_dims = obf[0].dims();
    let out_dims = orig[0].dims();
    if obf.iter().any(|i| i.dims() != in_dims) || orig.iter().any(|i| i.dims() != out_dims) {
        return Err(Error::Domain("inconsistent image dimensions in pairs".into()));
    }
    let m = obf.len();
    let d_in = in_dims.0 * in_dims.1;
    let d_out = out_dims.0 * out_dims.1;

    let mean_of = |imgs: &[ImageMatrix], d: usize| -> Vec<f64> {
        let mut mean = vec![0.0f64; d];
        for img in imgs {
            for (acc, v) in mean.iter_mut().zip(&img.values) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m as f64);
        mean
    };
    let mean_x = mean_of(obf, d_in);
    let mean_y = mean_of(orig, d_out);

    let mut x = Mat::zeros(m, d_in);
    for (r, img) in obf.iter().enumerate() {
        for c in 0..d_in {
            x.set(r, c, img.values[c] - mean_x[c]);
        }
    }
    let mut y = Mat::zeros(m, d_out);
    for (r, img) in orig.iter().enumerate() {
        for c in 0..d_out {
            y.set(r, c, img.values[c] - mean_y[c]);
        }
    }

    let xt = x.transpose();
    let mut gram = xt.matmul(&x);
    for i in 0..d_in {
        gram.set(i, i, gram.at(i, i) + lambda);
    }
    let xty = xt.matmul(&y);
    let w_in_out = cholesky_solve(gram, &xty)?; // D_in × D_out

    // store transposed so reconstruction is weights · x + intercept
    let mut weights = vec![0.0f64; d_out * d_in];
    for i in 0..d_in {
        for o in 0..d_out {
            weights[o * d_in + i] = w_in_out.at(i, o);
        }
    }
    let mut intercept = mean_y;
    for o in 0..d_out {
        let row = &weights[o * d_in..(o + 1) * d_in];
        let shift: f64 = row.iter().zip(&mean_x).map(|(w, mx)| w * mx).sum();
        intercept[o] -= shift;
    }
    Ok(RidgeAttacker {
        weights,
        intercept,
        lambda,
        in_dims,
        out_dims,
    })
}

/// weights · flatten(obf) + intercept, clipped to [0, 1] for reporting.
pub fn attack_reconstruct(attacker: &RidgeAttacker, obf: &ImageMatrix) -> Result<ImageMatrix> {
    if obf.dims() != attacker.in_dims {
        return Err(Error::Domain(format!(
            "input dims {:?} do not match attacker dims {:?}",
            obf.dims(),
            attacker.in_dims
        )));
    }
    let d_in = attacker.in_dims.0 * attacker.in_dims.1;
    let d_out = attacker.out_dims.0 * attacker.out_dims.1;
    let mut values = Vec::with_capacity(d_out);
    for o in 0..d_out {
        let row = &attacker.weights[o * d_in..(o + 1) * d_in];
        let v: f64 = row.iter().zip(&obf.values).map(|(w, x)| w * x).sum();
        values.push((v + attacker.intercept[o]).clamp(0.0, 1.0));
    }
    ImageMatrix::from_vec(attacker.out_dims.0, attacker.out_dims.1, values)
}

/// Attacker knowledge level: training data from the same generator as the
/// target, or from a generator with different stroke geometry and noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "same")]
    SameDistribution,
    #[serde(rename = "shifted")]
    ShiftedDistribution,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::SameDistribution => "same",
            Scenario::ShiftedDistribution => "shifted",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "same" => Ok(Scenario::SameDistribution),
            "shifted" => Ok(Scenario::ShiftedDistribution),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

/// Number of per-class samples in the attacker's own training set.
const ATTACKER_TRAIN_PER_CLASS: usize = 150;

/// Simulates the full reconstruction attack against `target_test`.
///
/// The target set is obfuscated with the owner's policy and basis. The
/// attacker generates their own training data per `scenario`, applies the
/// same technique with their own basis, permutation, and seeds, trains the
/// ridge model, and reconstructs the intercepted frames. The returned report
/// compares reconstructions against the true originals.
pub fn run_attack_scenario(
    scenario: Scenario,
    policy: &ObfuscationPolicy,
    basis: Option<&PcaBasis>,
    target_test: &LabeledDataset,
    seed: u64,
) -> Result<PrivacyReport> {
    policy.validate(basis)?;
    if target_test.is_empty() {
        return Ok(PrivacyReport::from_pairs(Vec::new(), Vec::new()));
    }
    let (h, w) = target_test.dims();
    let intercepted = obfuscate_batch(policy, basis, target_test)?;

    let attacker_data = match scenario {
        Scenario::SameDistribution => {
            generate_synthetic(ATTACKER_TRAIN_PER_CLASS, h, w, 0.05, mix_seed(seed, 1))?
        }
        Scenario::ShiftedDistribution => {
            generate_synthetic_shifted(ATTACKER_TRAIN_PER_CLASS, h, w, 0.08, mix_seed(seed, 2))?
        }
    };

    // same technique, attacker-side secrets
    let attacker_policy = ObfuscationPolicy {
        method: policy.method,
        n_components: policy.n_components,
        randomize: policy.randomize,
        master_seed: mix_seed(seed, 3),
    };
    let attacker_basis = if policy.method.is_pca() {
        let n = basis.expect("validated").n;
        Some(fit_pca(&attacker_data, n)?)
    } else {
        None
    };
    let attacker_obf = obfuscate_batch(&attacker_policy, attacker_basis.as_ref(), &attacker_data)?;

    let attacker = train_ridge_attacker(&attacker_obf.images, &attacker_data.images, DEFAULT_LAMBDA)?;
    let reconstructions: Vec<ImageMatrix> = intercepted
        .images
        .iter()
        .map(|img| attack_reconstruct(&attacker, img))
        .collect::<Result<_>>()?;
    privacy_report(&target_test.images, &reconstructions)
}

/// Obfuscates the probe under the owner's policy and matches it against an
/// already-obfuscated dataset.
///
/// `probe_index` names the probe's true counterpart inside `obf_dataset`;
/// pass an out-of-range index for a probe with no counterpart.
pub fn reidentify(
    probe_original: &ImageMatrix,
    probe_index: usize,
    policy: &ObfuscationPolicy,
    basis: Option<&PcaBasis>,
    obf_dataset: &LabeledDataset,
    seed: u64,
) -> Result<ReidResult> {
    policy.validate(basis)?;
    if obf_dataset.is_empty() {
        return Err(Error::Domain("re-identification needs a non-empty dataset".into()));
    }
    // fresh perturbation stream for a randomized policy, same fixed pipeline
    // otherwise
    let probe_policy = ObfuscationPolicy {
        master_seed: if policy.randomize {
            mix_seed(seed, 0x5eed)
        } else {
            policy.master_seed
        },
        ..policy.clone()
    };
    let perm = batch_permutation(policy, basis);
    let obf_probe = obfuscate_item(&probe_policy, basis, perm.as_ref(), probe_original, probe_index)?;

    if obf_probe.dims() != obf_dataset.dims() {
        return Err(Error::Domain(format!(
            "obfuscated probe dims {:?} do not match dataset dims {:?}",
            obf_probe.dims(),
            obf_dataset.dims()
        )));
    }
    let exact_match = obf_dataset
        .images
        .get(probe_index)
        .map_or(false, |img| img.bit_eq(&obf_probe));

    let dist = |img: &ImageMatrix| -> f64 {
        img.values
            .iter()
            .zip(&obf_probe.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let distances: Vec<f64> = obf_dataset.images.iter().map(dist).collect();
    let d_true = distances.get(probe_index).copied().unwrap_or(f64::INFINITY);
    let d_min = distances.iter().cloned().fold(f64::INFINITY, f64::min);
    let nn_rank = 1
        + distances
            .iter()
            .enumerate()
            .filter(|&(i, &d)| d < d_true || (d == d_true && i < probe_index))
            .count();
    Ok(ReidResult {
        probe_index,
        exact_match,
        nn_rank,
        distance_gap: d_true - d_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obfuscate::Method;
    use rand::Rng;

    fn random_image(h: usize, w: usize, seed: u64) -> ImageMatrix {
        let mut rng = crate::rng::seeded_rng(seed);
        ImageMatrix::from_vec(h, w, (0..h * w).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    fn train_mse(att: &RidgeAttacker, obf: &[ImageMatrix], orig: &[ImageMatrix]) -> f64 {
        let mut total = 0.0;
        let mut n = 0usize;
        for (x, y) in obf.iter().zip(orig) {
            let rec = attack_reconstruct(att, x).unwrap();
            for (a, b) in rec.values.iter().zip(&y.values) {
                total += (a - b) * (a - b);
                n += 1;
            }
        }
        total / n as f64
    }

    #[test]
    fn identity_task_reaches_tiny_mse() {
        let imgs: Vec<ImageMatrix> = (0..40).map(|s| random_image(4, 4, s)).collect();
        let att = train_ridge_attacker(&imgs, &imgs, 1e-8).unwrap();
        assert!(train_mse(&att, &imgs, &imgs) < 1e-8);
        let rec = attack_reconstruct(&att, &imgs[0]).unwrap();
        for (a, b) in rec.values.iter().zip(&imgs[0].values) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_targets_give_zero_weights() {
        let obf: Vec<ImageMatrix> = (0..10).map(|s| random_image(3, 3, 50 + s)).collect();
        let constant = {
            let mut img = ImageMatrix::zeros(3, 3);
            img.values.iter_mut().for_each(|v| *v = 0.6);
            img
        };
        let orig = vec![constant.clone(); 10];
        let att = train_ridge_attacker(&obf, &orig, 1e-2).unwrap();
        assert!(att.weights.iter().all(|w| w.abs() < 1e-8));
        let rec = attack_reconstruct(&att, &random_image(3, 3, 77)).unwrap();
        for v in &rec.values {
            assert!((v - 0.6).abs() < 1e-8);
        }
    }

    #[test]
    fn ridge_beats_mean_predictor() {
        // separable random data: target is a linear function of the input
        let obf: Vec<ImageMatrix> = (0..30).map(|s| random_image(3, 3, 100 + s)).collect();
        let orig: Vec<ImageMatrix> = obf
            .iter()
            .map(|x| {
                let values = x.values.iter().map(|v| 0.5 * v + 0.2).collect();
                ImageMatrix::from_vec(3, 3, values).unwrap()
            })
            .collect();
        let att = train_ridge_attacker(&obf, &orig, 1e-2).unwrap();
        let ridge_mse = train_mse(&att, &obf, &orig);

        let mut mean = vec![0.0f64; 9];
        for img in &orig {
            for (m, v) in mean.iter_mut().zip(&img.values) {
                *m += v / orig.len() as f64;
            }
        }
        let mean_mse: f64 = orig
            .iter()
            .map(|img| {
                img.values
                    .iter()
                    .zip(&mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / 9.0
            })
            .sum::<f64>()
            / orig.len() as f64;
        assert!(ridge_mse < mean_mse);
    }

    #[test]
    fn ridge_satisfies_normal_equations() {
        let obf: Vec<ImageMatrix> = (0..20).map(|s| random_image(4, 4, 200 + s)).collect();
        let orig: Vec<ImageMatrix> = (0..20).map(|s| random_image(4, 4, 300 + s)).collect();
        let lambda = 1e-2;
        let att = train_ridge_attacker(&obf, &orig, lambda).unwrap();

        // rebuild centered X, Y and check (XtX + lI) W = XtY
        let m = 20;
        let d = 16;
        let mut mean_x = vec![0.0f64; d];
        let mut mean_y = vec![0.0f64; d];
        for (x, y) in obf.iter().zip(&orig) {
            for i in 0..d {
                mean_x[i] += x.values[i] / m as f64;
                mean_y[i] += y.values[i] / m as f64;
            }
        }
        let mut resid: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..d {
            for o in 0..d {
                // lhs = sum_j [XtX + lI]_{i,j} W_{j,o}; rhs = [XtY]_{i,o}
                let mut lhs = lambda * att.weights[o * d + i];
                for j in 0..d {
                    let mut xtx = 0.0;
                    for (x, _) in obf.iter().zip(&orig) {
                        xtx += (x.values[i] - mean_x[i]) * (x.values[j] - mean_x[j]);
                    }
                    lhs += xtx * att.weights[o * d + j];
                }
                let mut rhs = 0.0;
                for (x, y) in obf.iter().zip(&orig) {
                    rhs += (x.values[i] - mean_x[i]) * (y.values[o] - mean_y[o]);
                }
                resid += (lhs - rhs) * (lhs - rhs);
                scale += rhs * rhs;
            }
        }
        assert!(resid.sqrt() / scale.sqrt().max(1e-12) < 1e-8);
    }

    #[test]
    fn training_is_deterministic() {
        let obf: Vec<ImageMatrix> = (0..10).map(|s| random_image(3, 3, 400 + s)).collect();
        let orig: Vec<ImageMatrix> = (0..10).map(|s| random_image(3, 3, 500 + s)).collect();
        let a = train_ridge_attacker(&obf, &orig, 1e-2).unwrap();
        let b = train_ridge_attacker(&obf, &orig, 1e-2).unwrap();
        assert_eq!(
            a.weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn invalid_training_inputs() {
        let one = vec![random_image(2, 2, 1)];
        assert!(train_ridge_attacker(&one, &one, 1e-2).is_err());
        let two = vec![random_image(2, 2, 1), random_image(2, 2, 2)];
        assert!(matches!(
            train_ridge_attacker(&two, &two, 0.0),
            Err(Error::Config(_))
        ));
        let bad = vec![random_image(2, 2, 1), random_image(3, 2, 2)];
        assert!(matches!(
            train_ridge_attacker(&bad, &two, 1e-2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn empty_target_gives_empty_report() {
        let ds = generate_synthetic(2, 8, 8, 0.05, 1).unwrap();
        let empty = LabeledDataset {
            images: Vec::new(),
            labels: Vec::new(),
            name: "empty".into(),
        };
        let policy = ObfuscationPolicy {
            method: Method::SvdU,
            n_components: None,
            randomize: false,
            master_seed: 3,
        };
        let rep = run_attack_scenario(Scenario::SameDistribution, &policy, None, &empty, 1).unwrap();
        assert_eq!(rep.count, 0);
        drop(ds);
    }

    #[test]
    fn deterministic_policy_reidentifies_exactly() {
        let ds = generate_synthetic(5, 9, 9, 0.05, 2).unwrap();
        let policy = ObfuscationPolicy {
            method: Method::SvdU,
            n_components: None,
            randomize: false,
            master_seed: 11,
        };
        let obf = obfuscate_batch(&policy, None, &ds).unwrap();
        let res = reidentify(&ds.images[3], 3, &policy, None, &obf, 0).unwrap();
        assert!(res.exact_match);
        assert_eq!(res.nn_rank, 1);
        assert_eq!(res.distance_gap, 0.0);
    }

    #[test]
    fn randomized_policy_defeats_exact_match() {
        let ds = generate_synthetic(5, 9, 9, 0.05, 3).unwrap();
        let policy = ObfuscationPolicy {
            method: Method::SvdU,
            n_components: None,
            randomize: true,
            master_seed: 11,
        };
        let obf = obfuscate_batch(&policy, None, &ds).unwrap();
        for trial in 0..100 {
            let res = reidentify(&ds.images[1], 1, &policy, None, &obf, trial).unwrap();
            assert!(!res.exact_match);
        }
    }

    #[test]
    fn absent_probe_does_not_match() {
        let ds = generate_synthetic(4, 9, 9, 0.05, 4).unwrap();
        let policy = ObfuscationPolicy {
            method: Method::SvdVh,
            n_components: None,
            randomize: false,
            master_seed: 5,
        };
        let obf = obfuscate_batch(&policy, None, &ds).unwrap();
        let stranger = random_image(9, 9, 999);
        let res = reidentify(&stranger, usize::MAX, &policy, None, &obf, 0).unwrap();
        assert!(!res.exact_match);
    }

    #[test]
    fn empty_dataset_is_domain_error() {
        let probe = random_image(4, 4, 1);
        let policy = ObfuscationPolicy {
            method: Method::SvdU,
            n_components: None,
            randomize: false,
            master_seed: 0,
        };
        let empty = LabeledDataset {
            images: Vec::new(),
            labels: Vec::new(),
            name: "empty".into(),
        };
        assert!(matches!(
            reidentify(&probe, 0, &policy, None, &empty, 0),
            Err(Error::Domain(_))
        ));
    }
}
