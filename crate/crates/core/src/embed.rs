//! Per-layer adjacency spectral embedding and projection onto the sphere.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{top_eigenpairs, Matrix, SpectralDecomposition};

/// Which stage of the pipeline produced an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    /// `Û |Λ̂|^{1/2}`.
    ScaledX,
    /// Rows of a scaled embedding projected onto the unit sphere.
    SphericalY,
    /// Leading left singular vectors of the concatenated spherical embeddings.
    JointU,
}

impl EmbeddingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingKind::ScaledX => "scaled_X",
            EmbeddingKind::SphericalY => "spherical_Y",
            EmbeddingKind::JointU => "joint_U",
        }
    }
}

/// `n x d` vertex representation.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub rows: Matrix,
    pub kind: EmbeddingKind,
    /// Rows whose norm fell below the zero tolerance.
    pub zero_rows: BTreeSet<usize>,
}

impl EmbeddingMatrix {
    pub fn new(rows: Matrix, kind: EmbeddingKind) -> Self {
        Self {
            rows,
            kind,
            zero_rows: BTreeSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        self.rows.row_iter().map(|r| r.norm()).collect()
    }
}

/// Scale eigenvectors by the square roots of their absolute eigenvalues.
pub fn scale_eigenvectors(d: &SpectralDecomposition) -> Matrix {
    let mut x = d.vectors.clone();
    for (j, v) in d.values.iter().enumerate() {
        x.column_mut(j).scale_mut(v.abs().sqrt());
    }
    x
}

/// Scaled adjacency spectral embedding from the `k` largest-magnitude
/// eigenpairs of `a`.
pub fn scaled_embedding(a: &Matrix, k: usize) -> Result<EmbeddingMatrix> {
    let d = top_eigenpairs(a, k)?;
    Ok(EmbeddingMatrix::new(
        scale_eigenvectors(&d),
        EmbeddingKind::ScaledX,
    ))
}

/// Zero tolerance relative to the largest row norm.
pub fn default_zero_tol(x: &EmbeddingMatrix) -> f64 {
    1e-10 * x.row_norms().into_iter().fold(0.0, f64::max)
}

/// Divide every row by its Euclidean norm. Rows with norm below `zero_tol`
/// stay zero and are recorded in `zero_rows`.
pub fn spherical_normalize(x: &EmbeddingMatrix, zero_tol: f64) -> EmbeddingMatrix {
    let mut rows = x.rows.clone();
    let mut zero_rows = BTreeSet::new();
    for (i, mut row) in rows.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm < zero_tol || norm == 0.0 {
            row.fill(0.0);
            zero_rows.insert(i);
        } else {
            row /= norm;
        }
    }
    EmbeddingMatrix {
        rows,
        kind: EmbeddingKind::SphericalY,
        zero_rows,
    }
}

/// [`spherical_normalize`] with [`default_zero_tol`].
pub fn spherical(x: &EmbeddingMatrix) -> EmbeddingMatrix {
    spherical_normalize(x, default_zero_tol(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    #[test]
    fn rank_one_recovers_theta() {
        let theta = DVector::from_vec(vec![0.2, 0.5, 0.9, 0.4]);
        let a = &theta * theta.transpose();
        let x = scaled_embedding(&a, 1).unwrap();
        let sign = x.rows[(2, 0)].signum();
        for i in 0..4 {
            assert_abs_diff_eq!(sign * x.rows[(i, 0)], theta[i], epsilon = 1e-9);
        }
        assert_eq!(x.kind, EmbeddingKind::ScaledX);
    }

    #[test]
    fn identity_single_component() {
        let x = scaled_embedding(&Matrix::identity(5, 5), 1).unwrap();
        assert!(x.row_norms().iter().all(|r| *r <= 1.0 + 1e-15));
        assert_abs_diff_eq!(x.rows.column(0).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_projection_examples() {
        let x = EmbeddingMatrix::new(
            Matrix::from_row_slice(2, 2, &[3.0, 4.0, 0.0, 0.0]),
            EmbeddingKind::ScaledX,
        );
        let y = spherical_normalize(&x, 1e-12);
        assert_abs_diff_eq!(y.rows[(0, 0)], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(y.rows[(0, 1)], 0.8, epsilon = 1e-15);
        assert_eq!(y.rows.row(1).norm(), 0.0);
        assert_eq!(y.zero_rows.iter().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(y.kind, EmbeddingKind::SphericalY);
    }

    #[test]
    fn scale_invariance() {
        let x = EmbeddingMatrix::new(
            Matrix::from_row_slice(3, 2, &[0.3, -0.1, 1.5, 2.0, -0.2, 0.7]),
            EmbeddingKind::ScaledX,
        );
        let scaled = EmbeddingMatrix::new(&x.rows * 37.5, EmbeddingKind::ScaledX);
        let a = spherical(&x);
        let b = spherical(&scaled);
        assert!((a.rows - b.rows).amax() <= 1e-12);
    }
}
