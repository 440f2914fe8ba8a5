//! Internal dense kernels: cyclic Jacobi eigendecomposition for symmetric
//! matrices, one-sided Jacobi SVD with full orthogonal factors, and a
//! Cholesky solver for SPD systems. Sized for desk-scale matrices
//! (hundreds of rows), fully deterministic.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Mat { rows, cols, data }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let row_out = &mut out.data[r * other.cols..(r + 1) * other.cols];
                let row_b = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// columns of an orthogonal matrix.
pub(crate) fn jacobi_eigen_sym(a: &Mat) -> (Vec<f64>, Mat) {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let scale = a.frob_norm().max(f64::MIN_POSITIVE);
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.at(p, q);
                if apq.abs() <= 1e-15 * scale {
                    continue;
                }
                rotated = true;
                let app = m.at(p, p);
                let aqq = m.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // update rows/columns p and q of the symmetric matrix
                for k in 0..n {
                    let mkp = m.at(k, p);
                    let mkq = m.at(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.at(p, k);
                    let mqk = m.at(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.at(i, i)).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));
    let evals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut evecs = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            evecs.set(r, new_col, v.at(r, old_col));
        }
    }
    (evals, evecs)
}

/// Full SVD: A = U * diag(s) * Vt with square orthogonal U (rows×rows) and
/// Vt (cols×cols); s has length min(rows, cols), descending.
pub(crate) fn svd_full(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    if a.rows >= a.cols {
        svd_tall(a)
    } else {
        // A = (At)t: if At = U2 S V2t then A = V2 S U2t
        let (u2, s, v2t) = svd_tall(&a.transpose());
        (v2t.transpose(), s, u2.transpose())
    }
}

/// One-sided Jacobi on a tall (rows >= cols) matrix.
fn svd_tall(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (rows, cols) = (a.rows, a.cols);
    // column-major working copy: cols of `g` converge to u_i * s_i
    let mut g: Vec<Vec<f64>> = (0..cols)
        .map(|c| (0..rows).map(|r| a.at(r, c)).collect())
        .collect();
    let mut v = Mat::identity(cols);
    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&g[p], &g[q]);
                    let mut a2 = 0.0;
                    let mut b2 = 0.0;
                    let mut ab = 0.0;
                    for i in 0..rows {
                        a2 += cp[i] * cp[i];
                        b2 += cq[i] * cq[i];
                        ab += cp[i] * cq[i];
                    }
                    (a2, b2, ab)
                };
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = c * t;
                let (head, tail) = g.split_at_mut(q);
                let (cp, cq) = (&mut head[p], &mut tail[0]);
                for i in 0..rows {
                    let gp = cp[i];
                    let gq = cq[i];
                    cp[i] = c * gp - s * gq;
                    cq[i] = s * gp + c * gq;
                }
                for i in 0..cols {
                    let vp = v.at(i, p);
                    let vq = v.at(i, q);
                    v.set(i, p, c * vp - s * vq);
                    v.set(i, q, s * vp + c * vq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut norms: Vec<f64> = g
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));
    norms = order.iter().map(|&i| norms[i]).collect();
    let s_max = norms.first().copied().unwrap_or(0.0);
    let rank_tol = s_max * 1e-13 * rows.max(cols) as f64;

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(rows);
    for (rank, &src) in order.iter().enumerate() {
        if norms[rank] > rank_tol {
            u_cols.push(g[src].iter().map(|x| x / norms[rank]).collect());
        }
    }
    complete_orthonormal(&mut u_cols, rows);

    let mut u = Mat::zeros(rows, rows);
    for (c, col) in u_cols.iter().enumerate() {
        for r in 0..rows {
            u.set(r, c, col[r]);
        }
    }
    let mut vt = Mat::zeros(cols, cols);
    for (new_row, &src) in order.iter().enumerate() {
        for c in 0..cols {
            vt.set(new_row, c, v.at(c, src));
        }
    }
    (u, norms, vt)
}

/// Greedily extends a set of orthonormal columns to a full basis of R^dim
/// using the best-aligned standard basis vectors (ties to the lowest index).
fn complete_orthonormal(cols: &mut Vec<Vec<f64>>, dim: usize) {
    while cols.len() < dim {
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for j in 0..dim {
            let mut r = vec![0.0; dim];
            r[j] = 1.0;
            // two Gram-Schmidt passes for stability
            for _ in 0..2 {
                for col in cols.iter() {
                    let dot: f64 = col.iter().zip(&r).map(|(a, b)| a * b).sum();
                    for (ri, ci) in r.iter_mut().zip(col) {
                        *ri -= dot * ci;
                    }
                }
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().map_or(true, |(_, _, bn)| norm > *bn) {
                best = Some((j, r, norm));
            }
        }
        let (_, mut r, norm) = best.expect("dim > 0");
        debug_assert!(norm > 1e-8);
        for x in r.iter_mut() {
            *x /= norm;
        }
        cols.push(r);
    }
}

/// Solves A X = B for SPD A via Cholesky; A and B are consumed.
pub(crate) fn cholesky_solve(mut a: Mat, b: &Mat) -> Result<Mat> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(a.rows, b.rows);
    let n = a.rows;
    // in-place lower factor
    for j in 0..n {
        let mut d = a.at(j, j);
        for k in 0..j {
            d -= a.at(j, k) * a.at(j, k);
        }
        if d <= 0.0 {
            return Err(Error::Domain(
                "matrix not positive definite in Cholesky factorization".into(),
            ));
        }
        let d = d.sqrt();
        a.set(j, j, d);
        for i in (j + 1)..n {
            let mut v = a.at(i, j);
            for k in 0..j {
                v -= a.at(i, k) * a.at(j, k);
            }
            a.set(i, j, v / d);
        }
    }
    let mut x = b.clone();
    let ncols = x.cols;
    // forward substitution L y = b
    for i in 0..n {
        for k in 0..i {
            let l = a.at(i, k);
            for c in 0..ncols {
                let v = x.at(i, c) - l * x.at(k, c);
                x.set(i, c, v);
            }
        }
        let d = a.at(i, i);
        for c in 0..ncols {
            x.set(i, c, x.at(i, c) / d);
        }
    }
    // back substitution Lt x = y
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let l = a.at(k, i);
            for c in 0..ncols {
                let v = x.at(i, c) - l * x.at(k, c);
                x.set(i, c, v);
            }
        }
        let d = a.at(i, i);
        for c in 0..ncols {
            x.set(i, c, x.at(i, c) / d);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_mat(rows: usize, cols: usize, seed: u64) -> Mat {
        let mut rng = crate::rng::seeded_rng(seed);
        Mat::from_vec(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
    }

    fn reconstruct(u: &Mat, s: &[f64], vt: &Mat) -> Mat {
        let mut us = Mat::zeros(u.rows, vt.rows);
        for r in 0..u.rows {
            for (k, &sv) in s.iter().enumerate() {
                us.set(r, k, u.at(r, k) * sv);
            }
        }
        us.matmul(vt)
    }

    fn ortho_residual(m: &Mat) -> f64 {
        let p = m.transpose().matmul(m);
        let mut r = 0.0f64;
        for i in 0..p.rows {
            for j in 0..p.cols {
                let expect = if i == j { 1.0 } else { 0.0 };
                r += (p.at(i, j) - expect).powi(2);
            }
        }
        r.sqrt()
    }

    #[test]
    fn svd_reconstructs_random_shapes() {
        for (rows, cols, seed) in [(5, 4, 1), (4, 7, 2), (6, 6, 3), (1, 5, 4), (9, 2, 5)] {
            let a = random_mat(rows, cols, seed);
            let (u, s, vt) = svd_full(&a);
            assert_eq!((u.rows, u.cols), (rows, rows));
            assert_eq!((vt.rows, vt.cols), (cols, cols));
            assert_eq!(s.len(), rows.min(cols));
            let err = {
                let mut d = reconstruct(&u, &s, &vt);
                for (x, y) in d.data.iter_mut().zip(&a.data) {
                    *x -= y;
                }
                d.frob_norm() / a.frob_norm()
            };
            assert!(err < 1e-12, "{rows}x{cols}: err={err}");
            assert!(ortho_residual(&u) < 1e-12);
            assert!(ortho_residual(&vt) < 1e-12);
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
            assert!(s.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn svd_handles_rank_deficiency() {
        // rank-1 matrix: outer product
        let mut a = Mat::zeros(5, 4);
        for r in 0..5 {
            for c in 0..4 {
                a.set(r, c, (r + 1) as f64 * (c + 1) as f64);
            }
        }
        let (u, s, vt) = svd_full(&a);
        assert!(s[1].abs() < 1e-10 * s[0]);
        let mut d = reconstruct(&u, &s, &vt);
        for (x, y) in d.data.iter_mut().zip(&a.data) {
            *x -= y;
        }
        assert!(d.frob_norm() / a.frob_norm() < 1e-12);
        assert!(ortho_residual(&u) < 1e-10);
    }

    #[test]
    fn svd_of_zero_matrix() {
        let a = Mat::zeros(3, 3);
        let (u, s, vt) = svd_full(&a);
        assert!(s.iter().all(|&x| x == 0.0));
        assert!(ortho_residual(&u) < 1e-12);
        assert!(ortho_residual(&vt) < 1e-12);
    }

    #[test]
    fn eigen_matches_known_matrix() {
        // [[2,1],[1,2]] has eigenvalues 3, 1
        let a = Mat::from_vec(2, 2, vec![2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = jacobi_eigen_sym(&a);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!(ortho_residual(&vecs) < 1e-12);
    }

    #[test]
    fn eigen_diagonalizes_random_symmetric() {
        let r = random_mat(6, 6, 8);
        let a = {
            let t = r.transpose();
            let mut s = Mat::zeros(6, 6);
            for i in 0..36 {
                s.data[i] = 0.5 * (r.data[i] + t.data[i]);
            }
            s
        };
        let (vals, vecs) = jacobi_eigen_sym(&a);
        // A v_i = lambda_i v_i
        let av = a.matmul(&vecs);
        for i in 0..6 {
            for r in 0..6 {
                assert!((av.at(r, i) - vals[i] * vecs.at(r, i)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let x = random_mat(6, 6, 12);
        let mut a = x.transpose().matmul(&x);
        for i in 0..6 {
            a.set(i, i, a.at(i, i) + 1.0);
        }
        let b = random_mat(6, 3, 13);
        let sol = cholesky_solve(a.clone(), &b).unwrap();
        let mut resid = a.matmul(&sol);
        for (r, bb) in resid.data.iter_mut().zip(&b.data) {
            *r -= bb;
        }
        assert!(resid.frob_norm() < 1e-10 * b.frob_norm().max(1.0));
    }
}
