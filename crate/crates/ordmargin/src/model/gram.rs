//! Symmetric Gram matrices and the rank-`p` factorization back to points.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;

use super::ModelError;

/// Symmetric `n×n` Gram matrix of an embedding; the decision variable of
/// every solver in this crate and the prediction model for unseen
/// comparisons. Positive semidefiniteness is enforced only on solver
/// outputs, not at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    m: DMatrix<f64>,
}

impl Gram {
    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    /// Gram matrix `XᵀX` of column points `x` (`dim × n`).
    pub fn from_points(x: &DMatrix<f64>) -> Self {
        Self { m: x.transpose() * x }
    }

    /// Wraps a square matrix, averaging away any antisymmetric round-off.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self, ModelError> {
        if m.nrows() != m.ncols() {
            return Err(ModelError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Squared Euclidean distance `g_aa − 2g_ab + g_bb` between embedded
    /// items `a` and `b`, reading both off-diagonal slots so the value is
    /// well defined even mid-computation when round-off leaves them
    /// slightly apart.
    pub fn squared_distance(&self, a: usize, b: usize) -> f64 {
        self.m[(a, a)] - self.m[(a, b)] - self.m[(b, a)] + self.m[(b, b)]
    }

    pub fn scale(&self, c: f64) -> Gram {
        Gram { m: &self.m * c }
    }

    /// Smallest eigenvalue relative to the largest magnitude; a matrix is
    /// accepted as PSD when this is ≥ `-1e-8`.
    pub fn psd_margin(&self) -> f64 {
        let eigen = SymmetricEigen::new(self.m.clone());
        let max = eigen.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let min = eigen.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    pub fn is_approximately_psd(&self) -> bool {
        self.psd_margin() >= -1e-8
    }
}

/// Factors `g` into a `p × n` point matrix by keeping the `p` algebraically
/// largest eigenvalues clamped at zero: `X = Λ_p^{1/2} V_pᵀ`. The
/// reconstruction `XᵀX` matches `g` up to the energy of the discarded and
/// negative eigenvalues.
pub fn gram_to_embedding(g: &Gram, p: usize) -> DMatrix<f64> {
    let n = g.n();
    let p = p.min(n);
    let eigen = SymmetricEigen::new(g.matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let mut x = DMatrix::zeros(p, n);
    for (row, &idx) in order.iter().take(p).enumerate() {
        let scale = eigen.eigenvalues[idx].max(0.0).sqrt();
        for col in 0..n {
            x[(row, col)] = scale * eigen.eigenvectors[(col, idx)];
        }
    }
    x
}
