//! Dense symmetric eigendecomposition and truncated SVD.
//!
//! The eigensolver is a Householder reduction to tridiagonal form followed by
//! implicit QL iterations (the classic `tred2`/`tql2` pair). The SVD is built on
//! top of it through the smaller Gram matrix, with singular values recomputed as
//! column norms and the singular vectors re-orthogonalized afterwards.
//!
//! Output is deterministic: eigenpairs are ordered by descending magnitude (ties
//! broken by signed value, descending) and every returned vector has its
//! largest-magnitude entry positive (ties broken by the lowest index).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type Matrix = DMatrix<f64>;

/// Entrywise tolerance used to accept a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-9;

const MAX_QL_ITERATIONS: usize = 100;

/// Leading eigenpairs of a symmetric matrix.
///
/// `p` and `q` count the positive and negative retained eigenvalues; the
/// diagonal sign matrix `I_{p,q}` is `diag(sign(values))`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub p: usize,
    pub q: usize,
}

impl SpectralDecomposition {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    /// Signs of the retained eigenvalues (zero counts as positive).
    pub fn signature(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| if *v < 0.0 { -1.0 } else { 1.0 })
            .collect()
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.vectors.clone();
        for (j, v) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*v);
        }
        &scaled * self.vectors.transpose()
    }
}

/// Truncated singular value decomposition `M ≈ left · diag(singular) · right^T`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: Matrix,
    pub singular: Vec<f64>,
    pub right: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.left.clone();
        for (j, s) in self.singular.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        &scaled * self.right.transpose()
    }
}

pub fn check_finite(m: &Matrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Verify that `m` is square, finite and symmetric within `tol` entrywise.
pub fn check_symmetric(m: &Matrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    check_finite(m)?;
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (m[(i, j)] - m[(j, i)]).abs();
            if diff > tol {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    diff,
                });
            }
        }
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix; eigenvalues are returned
/// unsorted alongside the matching eigenvector columns.
pub fn symmetric_eigen(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = s.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("matrix has no rows"));
    }
    // Column-major working copy, symmetrized to absorb round-off asymmetry.
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            v[j * n + i] = 0.5 * (s[(i, j)] + s[(j, i)]);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e);
    tridiagonal_ql(n, &mut v, &mut d, &mut e)?;
    let vectors = Matrix::from_vec(n, n, v);
    Ok((d, vectors))
}

/// The `k` eigenpairs of largest magnitude of a symmetric matrix.
pub fn top_eigenpairs(s: &Matrix, k: usize) -> Result<SpectralDecomposition> {
    check_symmetric(s, SYMMETRY_TOL)?;
    let n = s.nrows();
    if k == 0 || k > n {
        return Err(Error::RankOutOfRange {
            requested: k,
            max: n,
        });
    }
    let (values, vectors) = symmetric_eigen(s)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
    });
    let mut out = Matrix::zeros(n, k);
    let mut kept = Vec::with_capacity(k);
    for (j, &idx) in order.iter().take(k).enumerate() {
        out.set_column(j, &vectors.column(idx));
        kept.push(values[idx]);
    }
    canonicalize_signs(&mut out, None);
    let p = kept.iter().filter(|v| **v >= 0.0).count();
    Ok(SpectralDecomposition {
        q: k - p,
        p,
        values: kept,
        vectors: out,
    })
}

/// Leading `k` singular triplets of `m`.
pub fn truncated_svd(m: &Matrix, k: usize) -> Result<SvdResult> {
    let (rows, cols) = m.shape();
    let max = rows.min(cols);
    if k == 0 || k > max {
        return Err(Error::RankOutOfRange { requested: k, max });
    }
    check_finite(m)?;
    if rows < cols {
        let t = truncated_svd(&m.transpose(), k)?;
        let mut res = SvdResult {
            left: t.right,
            singular: t.singular,
            right: t.left,
        };
        canonicalize_signs(&mut res.left, Some(&mut res.right));
        return Ok(res);
    }

    // rows >= cols: diagonalize the cols x cols Gram matrix.
    let gram = m.transpose() * m;
    let (_, right_full) = symmetric_eigen(&gram)?;
    let projected = m * &right_full;
    let mut sigma: Vec<(f64, usize)> = (0..cols).map(|j| (projected.column(j).norm(), j)).collect();
    sigma.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut right = Matrix::zeros(cols, k);
    let mut left = Matrix::zeros(rows, k);
    let mut singular = Vec::with_capacity(k);
    let scale = sigma[0].0;
    for (j, &(s, idx)) in sigma.iter().take(k).enumerate() {
        right.set_column(j, &right_full.column(idx));
        singular.push(s);
        if s > scale * 1e-13 && s > 0.0 {
            left.set_column(j, &(projected.column(idx) / s));
        }
    }
    orthonormalize_columns(&mut left);
    orthonormalize_columns(&mut right);
    canonicalize_signs(&mut left, Some(&mut right));
    Ok(SvdResult {
        left,
        singular,
        right,
    })
}

/// Two-pass modified Gram-Schmidt. Columns that vanish (or start at zero) are
/// replaced by the first standard basis vector orthogonal to the others.
pub fn orthonormalize_columns(m: &mut Matrix) {
    let (n, k) = m.shape();
    let mut next_basis = 0;
    for j in 0..k {
        let original = m.column(j).norm();
        for _ in 0..2 {
            for i in 0..j {
                let proj = m.column(i).dot(&m.column(j));
                let qi = m.column(i).clone_owned();
                m.column_mut(j).axpy(-proj, &qi, 1.0);
            }
        }
        let norm = m.column(j).norm();
        if original > 0.0 && norm > 1e-8 * original {
            m.column_mut(j).scale_mut(1.0 / norm);
            continue;
        }
        // Fill with a standard basis vector orthogonal to earlier columns.
        loop {
            assert!(next_basis < n, "cannot complete an orthonormal basis");
            let mut cand = DVector::zeros(n);
            cand[next_basis] = 1.0;
            next_basis += 1;
            for _ in 0..2 {
                for i in 0..j {
                    let proj = m.column(i).dot(&cand);
                    cand.axpy(-proj, &m.column(i).clone_owned(), 1.0);
                }
            }
            let cn = cand.norm();
            if cn > 1e-6 {
                m.set_column(j, &(cand / cn));
                break;
            }
        }
    }
}

/// Flip each column so its largest-magnitude entry is positive. The paired
/// matrix, if any, has the same columns flipped.
pub fn canonicalize_signs(m: &mut Matrix, mut paired: Option<&mut Matrix>) {
    for j in 0..m.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..m.nrows() {
            let a = m[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m[(best, j)] < 0.0 {
            m.column_mut(j).neg_mut();
            if let Some(p) = paired.as_deref_mut() {
                p.column_mut(j).neg_mut();
            }
        }
    }
}

/// Sines of the principal angles between the column spans of two matrices with
/// orthonormal columns, as the spectral norm of `(I - A A^T) B`.
pub fn subspace_distance(a: &Matrix, b: &Matrix) -> f64 {
    let resid = b - a * (a.transpose() * b);
    let gram = resid.transpose() * &resid;
    match symmetric_eigen(&gram) {
        Ok((vals, _)) => vals.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt(),
        Err(_) => f64::NAN,
    }
}

// Householder reduction of a symmetric matrix (column-major in `v`) to
// tridiagonal form, accumulating the orthogonal transform in `v`.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| j * n + i;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for x in &d[..i] {
            scale += x.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), applying rotations to the columns of
// the column-major eigenvector matrix `vt`.
fn tridiagonal_ql(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence(MAX_QL_ITERATIONS));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
