//! Eigenvalue-based matrix kernels: singular-value thresholding for the
//! nuclear-norm prox and the nearest-PSD projection.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};

use super::{shrink, KernelError};

const EIGEN_MAX_SWEEPS: usize = 100_000;

/// Eigendecomposition of the symmetric part of `m`, surfacing convergence
/// failure instead of looping.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>), KernelError> {
    let sym = (m + m.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(KernelError::EigenFailed);
    }
    let eigen = SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or(KernelError::EigenFailed)?;
    Ok((eigen.eigenvalues, eigen.eigenvectors))
}

fn reconstruct(values: &DVector<f64>, vectors: &DMatrix<f64>) -> DMatrix<f64> {
    let scaled = vectors * DMatrix::from_diagonal(values);
    scaled * vectors.transpose()
}

/// Proximal operator of `τ‖·‖_*` at the symmetric part of `m`: eigenvalues
/// are soft-thresholded in magnitude with their signs preserved, which for
/// symmetric matrices coincides with thresholding the singular values.
pub fn svt(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>, KernelError> {
    debug_assert!(tau >= 0.0);
    let (values, vectors) = symmetric_eigen(m)?;
    let thresholded = values.map(|v| shrink(v, tau));
    Ok(reconstruct(&thresholded, &vectors))
}

/// Nuclear norm of the symmetric part of `m` (sum of eigenvalue
/// magnitudes).
pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64, KernelError> {
    let (values, _) = symmetric_eigen(m)?;
    Ok(values.iter().map(|v| v.abs()).sum())
}

/// Frobenius-nearest positive semidefinite matrix: clamp the negative
/// eigenvalues of the symmetric part at zero.
pub fn nearest_psd(a: &DMatrix<f64>) -> Result<DMatrix<f64>, KernelError> {
    let (values, vectors) = symmetric_eigen(a)?;
    let clamped = values.map(|v| v.max(0.0));
    Ok(reconstruct(&clamped, &vectors))
}
