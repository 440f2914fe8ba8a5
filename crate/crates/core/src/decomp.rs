//! Matrix factorizations: per-image full SVD and dataset-level PCA with
//! projection and inverse transform.

use std::fs;
use std::path::Path;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::image::ImageMatrix;
use crate::linalg::{self, Mat};

/// The (U, S, V^H) triple with a deterministic sign convention.
///
/// `u` is H×H orthogonal, `v_h` is W×W orthogonal (plain transpose of V for
/// real inputs), `s` holds the min(H, W) singular values in descending order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: ImageMatrix,
    pub s: Vec<f64>,
    pub v_h: ImageMatrix,
}

/// Dataset-level PCA artifact: per-pixel mean plus `n` orthonormal components
/// ordered by descending explained variance.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    /// length-D mean vector, D = H*W
    pub mean: Vec<f64>,
    /// n×D, row-major; rows orthonormal
    pub components: Vec<f64>,
    pub n: usize,
    pub source_dims: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub coeffs: Vec<f64>,
}

impl PcaBasis {
    pub fn dim(&self) -> usize {
        self.source_dims.0 * self.source_dims.1
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.components[i * d..(i + 1) * d]
    }
}

/// Full SVD of an image with reproducible signs.
pub fn svd(image: &ImageMatrix) -> Result<SvdFactors> {
    if !image.is_finite() {
        return Err(Error::Domain("non-finite values in SVD input".into()));
    }
    let a = Mat::from_vec(image.height, image.width, image.values.clone());
    let (mut u, s, mut vt) = linalg::svd_full(&a);
    apply_sign_convention(&mut u, &mut vt, s.len());
    Ok(SvdFactors {
        u: mat_to_image(u),
        s,
        v_h: mat_to_image(vt),
    })
}

/// Canonical signs: in each column of `u` the largest-|entry| element (ties
/// to the lowest row) is made non-negative, negating the paired row of `vt`
/// in tandem. Unpaired columns/rows (from non-square inputs) are
/// canonicalized the same way on their own.
fn apply_sign_convention(u: &mut Mat, vt: &mut Mat, paired: usize) {
    for j in 0..u.cols {
        let mut best = (0usize, 0.0f64);
        for i in 0..u.rows {
            let a = u.at(i, j).abs();
            if a > best.1 {
                best = (i, a);
            }
        }
        if u.at(best.0, j) < 0.0 {
            for i in 0..u.rows {
                u.set(i, j, -u.at(i, j));
            }
            if j < paired {
                for c in 0..vt.cols {
                    vt.set(j, c, -vt.at(j, c));
                }
            }
        }
    }
    for j in paired..vt.rows {
        let mut best = (0usize, 0.0f64);
        for c in 0..vt.cols {
            let a = vt.at(j, c).abs();
            if a > best.1 {
                best = (c, a);
            }
        }
        if vt.at(j, best.0) < 0.0 {
            for c in 0..vt.cols {
                vt.set(j, c, -vt.at(j, c));
            }
        }
    }
}

fn mat_to_image(m: Mat) -> ImageMatrix {
    ImageMatrix {
        height: m.rows,
        width: m.cols,
        values: m.data,
        unbounded: true,
    }
}

/// u * diag(s) * v_h; the result is flagged unbounded.
pub fn svd_reconstruct(f: &SvdFactors) -> Result<ImageMatrix> {
    let h = f.u.height;
    let w = f.v_h.width;
    if f.u.width != f.u.height || f.v_h.width != f.v_h.height || f.s.len() != h.min(w) {
        return Err(Error::Domain(format!(
            "inconsistent SVD factor dimensions: u {}x{}, s {}, v_h {}x{}",
            f.u.height,
            f.u.width,
            f.s.len(),
            f.v_h.height,
            f.v_h.width
        )));
    }
    let mut values = vec![0.0f64; h * w];
    for (k, &sv) in f.s.iter().enumerate() {
        if sv == 0.0 {
            continue;
        }
        for r in 0..h {
            let usk = f.u.at(r, k) * sv;
            let row = &mut values[r * w..(r + 1) * w];
            let vrow = &f.v_h.values[k * w..(k + 1) * w];
            for (o, v) in row.iter_mut().zip(vrow) {
                *o += usk * v;
            }
        }
    }
    let mut img = ImageMatrix::from_vec(h, w, values)?;
    img.unbounded = true;
    Ok(img)
}

/// Fits the top-`n` principal components of the mean-centered training set.
///
/// When the sample count M is at most the pixel count D, the M×M Gram matrix
/// is eigendecomposed instead of the D×D covariance.
pub fn fit_pca(train: &LabeledDataset, n: usize) -> Result<PcaBasis> {
    let (h, w) = train.dims();
    let d = h * w;
    let m = train.len();
    let max_n = (m.saturating_sub(1)).min(d);
    if n == 0 || n > max_n {
        return Err(Error::Config(format!(
            "component count {n} out of range 1..={max_n} (M={m}, D={d})"
        )));
    }

    let mut mean = vec![0.0f64; d];
    for img in &train.images {
        for (acc, v) in mean.iter_mut().zip(&img.values) {
            *acc += v;
        }
    }
    for v in mean.iter_mut() {
        *v /= m as f64;
    }

    // centered data matrix, M×D
    let mut x = Mat::zeros(m, d);
    for (r, img) in train.images.iter().enumerate() {
        for c in 0..d {
            x.set(r, c, img.values[c] - mean[c]);
        }
    }
    let total_var: f64 = x.data.iter().map(|v| v * v).sum();
    if total_var / (m * d) as f64 <= 1e-24 {
        return Err(Error::Config(
            "degenerate training set: zero variance after centering".into(),
        ));
    }

    let mut components = vec![0.0f64; n * d];
    if m <= d {
        // Gram route: eigenvectors of X Xt lift to right singular vectors
        let gram = x.matmul(&x.transpose());
        let (evals, evecs) = linalg::jacobi_eigen_sym(&gram);
        let lambda_tol = evals[0].max(0.0) * 1e-12;
        for k in 0..n {
            if evals[k] <= lambda_tol {
                return Err(Error::Config(format!(
                    "rank-deficient training set: component {k} has no variance"
                )));
            }
            let scale = 1.0 / evals[k].sqrt();
            let row = &mut components[k * d..(k + 1) * d];
            for i in 0..m {
                let coef = evecs.at(i, k) * scale;
                if coef == 0.0 {
                    continue;
                }
                let xrow = &x.data[i * d..(i + 1) * d];
                for (o, v) in row.iter_mut().zip(xrow) {
                    *o += coef * v;
                }
            }
            // renormalize against accumulated rounding
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    } else {
        let cov = x.transpose().matmul(&x);
        let (evals, evecs) = linalg::jacobi_eigen_sym(&cov);
        let lambda_tol = evals[0].max(0.0) * 1e-12;
        for k in 0..n {
            if evals[k] <= lambda_tol {
                return Err(Error::Config(format!(
                    "rank-deficient training set: component {k} has no variance"
                )));
            }
            for c in 0..d {
                components[k * d + c] = evecs.at(c, k);
            }
        }
    }

    // sign convention as for SVD factors: largest-|entry| non-negative
    for k in 0..n {
        let row = &mut components[k * d..(k + 1) * d];
        let mut best = (0usize, 0.0f64);
        for (i, v) in row.iter().enumerate() {
            if v.abs() > best.1 {
                best = (i, v.abs());
            }
        }
        if row[best.0] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
    }

    Ok(PcaBasis {
        mean,
        components,
        n,
        source_dims: (h, w),
    })
}

/// coeffs = components * (flatten(image) - mean)
pub fn pca_project(basis: &PcaBasis, image: &ImageMatrix) -> Result<CoefficientVector> {
    if image.dims() != basis.source_dims {
        return Err(Error::Domain(format!(
            "image dims {:?} do not match basis dims {:?}",
            image.dims(),
            basis.source_dims
        )));
    }
    let d = basis.dim();
    let centered: Vec<f64> = image
        .values
        .iter()
        .zip(&basis.mean)
        .map(|(v, m)| v - m)
        .collect();
    let coeffs = (0..basis.n)
        .map(|k| {
            basis.component(k)
                .iter()
                .zip(&centered)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    debug_assert_eq!(centered.len(), d);
    Ok(CoefficientVector { coeffs })
}

/// mean + coeffs^T * components, reshaped to the source dims and flagged
/// unbounded.
pub fn pca_reconstruct(basis: &PcaBasis, coeffs: &CoefficientVector) -> Result<ImageMatrix> {
    if coeffs.coeffs.len() != basis.n {
        return Err(Error::Domain(format!(
            "coefficient length {} does not match basis n {}",
            coeffs.coeffs.len(),
            basis.n
        )));
    }
    let d = basis.dim();
    let mut values = basis.mean.clone();
    for (k, &c) in coeffs.coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (o, v) in values.iter_mut().zip(basis.component(k)) {
            *o += c * v;
        }
    }
    debug_assert_eq!(values.len(), d);
    let (h, w) = basis.source_dims;
    let mut img = ImageMatrix::from_vec(h, w, values)?;
    img.unbounded = true;
    Ok(img)
}

// ---------------------------------------------------------------------------
// PCA1 file format: magic "PCA1"; n, H, W as 4-byte LE unsigned; mean
// (D f64 LE); components (n×D f64 LE); permutation mapping (n×u32 LE).

pub const PCA_MAGIC: &[u8; 4] = b"PCA1";

pub fn encode_pca(basis: &PcaBasis, permutation: &[usize]) -> Result<Vec<u8>> {
    if permutation.len() != basis.n {
        return Err(Error::Domain(format!(
            "permutation length {} does not match basis n {}",
            permutation.len(),
            basis.n
        )));
    }
    let (h, w) = basis.source_dims;
    let mut out = Vec::with_capacity(16 + (basis.mean.len() + basis.components.len()) * 8);
    out.extend_from_slice(PCA_MAGIC);
    out.extend_from_slice(&(basis.n as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    for v in basis.mean.iter().chain(basis.components.iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &p in permutation {
        out.extend_from_slice(&(p as u32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_pca(bytes: &[u8]) -> Result<(PcaBasis, Vec<usize>)> {
    if bytes.len() < 16 {
        return Err(Error::format("file shorter than 16-byte header", 0));
    }
    if &bytes[0..4] != PCA_MAGIC {
        return Err(Error::format("bad magic, expected \"PCA1\"", 0));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    let n = u32_at(4);
    let h = u32_at(8);
    let w = u32_at(12);
    let d = h * w;
    let expected = 16 + (d + n * d) * 8 + n * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            format!("file length {} does not match header ({expected})", bytes.len()),
            16,
        ));
    }
    let mut off = 16;
    let read_f64s = |count: usize, off: &mut usize| -> Vec<f64> {
        let out = bytes[*off..*off + count * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        *off += count * 8;
        out
    };
    let mean = read_f64s(d, &mut off);
    let components = read_f64s(n * d, &mut off);
    let mut permutation = Vec::with_capacity(n);
    for k in 0..n {
        permutation.push(u32_at(off + k * 4));
    }
    let mut sorted = permutation.clone();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::format("stored permutation is not a bijection", off as u64));
    }
    Ok((
        PcaBasis {
            mean,
            components,
            n,
            source_dims: (h, w),
        },
        permutation,
    ))
}

pub fn save_pca(basis: &PcaBasis, permutation: &[usize], path: &Path) -> Result<()> {
    crate::fsutil::write_atomic(path, &encode_pca(basis, permutation)?)
}

pub fn load_pca(path: &Path) -> Result<(PcaBasis, Vec<usize>)> {
    decode_pca(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, LabeledDataset};
    use rand::Rng;

    fn random_image(h: usize, w: usize, seed: u64) -> ImageMatrix {
        let mut rng = crate::rng::seeded_rng(seed);
        ImageMatrix::from_vec(h, w, (0..h * w).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    fn rel_frob_err(a: &ImageMatrix, b: &ImageMatrix) -> f64 {
        let num: f64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        num / den.max(1e-300)
    }

    #[test]
    fn svd_of_identity() {
        let eye = {
            let mut img = ImageMatrix::zeros(3, 3);
            for i in 0..3 {
                *img.at_mut(i, i) = 1.0;
            }
            img
        };
        let f = svd(&eye).unwrap();
        for s in &f.s {
            assert!((s - 1.0).abs() < 1e-12);
        }
        // u * v_h = I for identity input
        let prod = svd_reconstruct(&f).unwrap();
        assert!(rel_frob_err(&prod, &eye) < 1e-12);
    }

    #[test]
    fn svd_of_diagonal() {
        let mut img = ImageMatrix::zeros(2, 2);
        *img.at_mut(0, 0) = 3.0;
        *img.at_mut(1, 1) = 1.0;
        let f = svd(&img).unwrap();
        assert!((f.s[0] - 3.0).abs() < 1e-12);
        assert!((f.s[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut img = ImageMatrix::zeros(2, 2);
        *img.at_mut(0, 1) = f64::NAN;
        assert!(matches!(svd(&img), Err(Error::Domain(_))));
    }

    #[test]
    fn svd_round_trip_and_orthogonality() {
        for seed in 0..20 {
            let img = random_image(6, 5, seed);
            let f = svd(&img).unwrap();
            let back = svd_reconstruct(&f).unwrap();
            assert!(rel_frob_err(&back, &img) < 1e-10);
            for m in [&f.u, &f.v_h] {
                let n = m.height;
                for i in 0..n {
                    for j in 0..n {
                        let dot: f64 = (0..n).map(|k| m.at(k, i) * m.at(k, j)).sum();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((dot - expect).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn svd_is_bit_deterministic() {
        let img = random_image(8, 8, 17);
        let f1 = svd(&img).unwrap();
        let f2 = svd(&img).unwrap();
        assert!(f1.u.bit_eq(&f2.u));
        assert!(f1.v_h.bit_eq(&f2.v_h));
        assert_eq!(
            f1.s.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            f2.s.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    // Oracle: singular values are the sqrt eigenvalues of At*A, computed by
    // an independent test-local power-iteration-with-deflation eigensolver.
    #[test]
    fn singular_values_match_gram_eigen_oracle() {
        let img = random_image(5, 4, 33);
        let f = svd(&img).unwrap();
        let oracle = gram_eigen_oracle(&img);
        for (s, lambda) in f.s.iter().zip(&oracle) {
            assert!((s - lambda.max(0.0).sqrt()).abs() < 1e-9);
        }
    }

    fn gram_eigen_oracle(img: &ImageMatrix) -> Vec<f64> {
        let (h, w) = img.dims();
        let mut g = vec![vec![0.0f64; w]; w];
        for i in 0..w {
            for j in 0..w {
                g[i][j] = (0..h).map(|r| img.at(r, i) * img.at(r, j)).sum();
            }
        }
        let mut evals = Vec::new();
        for _ in 0..w {
            let mut v = vec![1.0f64; w];
            let mut lambda = 0.0;
            for _ in 0..20_000 {
                let mut nv = vec![0.0f64; w];
                for i in 0..w {
                    nv[i] = (0..w).map(|j| g[i][j] * v[j]).sum();
                }
                lambda = nv.iter().map(|x| x * x).sum::<f64>().sqrt();
                if lambda < 1e-300 {
                    break;
                }
                for x in nv.iter_mut() {
                    *x /= lambda;
                }
                v = nv;
            }
            evals.push(lambda);
            for i in 0..w {
                for j in 0..w {
                    g[i][j] -= lambda * v[i] * v[j];
                }
            }
        }
        evals
    }

    #[test]
    fn zeroed_singular_values_reconstruct_zero() {
        let img = random_image(4, 4, 2);
        let mut f = svd(&img).unwrap();
        f.s.iter_mut().for_each(|s| *s = 0.0);
        let z = svd_reconstruct(&f).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pca_degenerate_training_set_errors() {
        let img = random_image(4, 4, 3);
        let ds = LabeledDataset::new(vec![img.clone(), img.clone(), img], vec![0, 0, 1], "c")
            .unwrap();
        assert!(matches!(fit_pca(&ds, 1), Err(Error::Config(_))));
    }

    #[test]
    fn pca_two_point_hand_solution() {
        // 2 distinct images, n=1: the component is the normalized difference
        // direction; projecting either image reconstructs it exactly.
        let a = random_image(3, 3, 4);
        let b = random_image(3, 3, 5);
        let ds = LabeledDataset::new(vec![a.clone(), b.clone()], vec![0, 1], "two").unwrap();
        let basis = fit_pca(&ds, 1).unwrap();

        let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir: Vec<f64> = diff.iter().map(|v| v / norm).collect();
        let dot: f64 = basis.component(0).iter().zip(&dir).map(|(x, y)| x * y).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-10, "component not along difference");

        for img in [&a, &b] {
            let rec = pca_reconstruct(&basis, &pca_project(&basis, img).unwrap()).unwrap();
            let err: f64 = rec
                .values
                .iter()
                .zip(&img.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-10);
        }
    }

    #[test]
    fn pca_component_variance_non_increasing() {
        // compare against the ordering implied by projected variances
        let ds = generate_synthetic(20, 8, 8, 0.05, 21).unwrap();
        let basis = fit_pca(&ds, 6).unwrap();
        let mut vars = vec![0.0f64; 6];
        for img in &ds.images {
            let c = pca_project(&basis, img).unwrap();
            for (v, x) in vars.iter_mut().zip(&c.coeffs) {
                *v += x * x;
            }
        }
        for w in vars.windows(2) {
            assert!(w[0] >= w[1] - 1e-9, "explained variance increased: {vars:?}");
        }
    }

    #[test]
    fn pca_project_mean_is_zero() {
        let ds = generate_synthetic(10, 6, 6, 0.05, 8).unwrap();
        let basis = fit_pca(&ds, 3).unwrap();
        let mean_img = ImageMatrix::from_vec(6, 6, basis.mean.clone()).unwrap();
        let c = pca_project(&basis, &mean_img).unwrap();
        assert!(c.coeffs.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn pca_project_unit_coefficient() {
        let ds = generate_synthetic(10, 6, 6, 0.05, 9).unwrap();
        let basis = fit_pca(&ds, 4).unwrap();
        let mut values = basis.mean.clone();
        for (v, c) in values.iter_mut().zip(basis.component(0)) {
            *v += 2.0 * c;
        }
        let img = ImageMatrix::from_vec(6, 6, values).unwrap();
        let c = pca_project(&basis, &img).unwrap();
        assert!((c.coeffs[0] - 2.0).abs() < 1e-10);
        for &x in &c.coeffs[1..] {
            assert!(x.abs() < 1e-10);
        }
    }

    #[test]
    fn pca_project_matches_dot_product_oracle() {
        let ds = generate_synthetic(10, 5, 5, 0.05, 10).unwrap();
        let basis = fit_pca(&ds, 5).unwrap();
        let img = random_image(5, 5, 99);
        let c = pca_project(&basis, &img).unwrap();
        for k in 0..5 {
            let mut expect = 0.0;
            for i in 0..25 {
                expect += basis.component(k)[i] * (img.values[i] - basis.mean[i]);
            }
            assert!((c.coeffs[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn pca_full_rank_round_trip() {
        let ds = generate_synthetic(8, 6, 6, 0.05, 12).unwrap();
        let n = ds.len() - 1;
        let basis = fit_pca(&ds, n).unwrap();
        for img in &ds.images {
            let rec = pca_reconstruct(&basis, &pca_project(&basis, img).unwrap()).unwrap();
            assert!(rel_frob_err(&rec, img) < 1e-8);
        }
    }

    #[test]
    fn pca_error_non_increasing_in_n() {
        let ds = generate_synthetic(20, 8, 8, 0.05, 13).unwrap();
        let probe = &ds.images[3];
        let mut prev = f64::INFINITY;
        for n in [1usize, 2, 4, 8, 16] {
            let basis = fit_pca(&ds, n).unwrap();
            let rec = pca_reconstruct(&basis, &pca_project(&basis, probe).unwrap()).unwrap();
            let err: f64 = rec
                .values
                .iter()
                .zip(&probe.values)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            assert!(err <= prev + 1e-12, "error increased at n={n}");
            prev = err;
        }
    }

    #[test]
    fn pca_project_of_reconstruct_is_identity_on_coeffs() {
        let ds = generate_synthetic(12, 6, 6, 0.05, 14).unwrap();
        let basis = fit_pca(&ds, 5).unwrap();
        let mut rng = crate::rng::seeded_rng(55);
        let coeffs = CoefficientVector {
            coeffs: (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        };
        let img = pca_reconstruct(&basis, &coeffs).unwrap();
        let back = pca_project(&basis, &img).unwrap();
        for (a, b) in coeffs.coeffs.iter().zip(&back.coeffs) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn pca_n_out_of_range() {
        let ds = generate_synthetic(5, 4, 4, 0.05, 15).unwrap();
        assert!(matches!(fit_pca(&ds, 0), Err(Error::Config(_))));
        assert!(matches!(fit_pca(&ds, 10), Err(Error::Config(_))));
    }

    #[test]
    fn pca_file_round_trip() {
        let ds = generate_synthetic(10, 5, 5, 0.05, 16).unwrap();
        let basis = fit_pca(&ds, 4).unwrap();
        let perm = vec![2usize, 0, 3, 1];
        let bytes = encode_pca(&basis, &perm).unwrap();
        let (back, back_perm) = decode_pca(&bytes).unwrap();
        assert_eq!(back_perm, perm);
        assert_eq!(back.n, basis.n);
        assert_eq!(back.source_dims, basis.source_dims);
        assert_eq!(
            back.mean.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            basis.mean.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(
            back.components.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            basis.components.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
