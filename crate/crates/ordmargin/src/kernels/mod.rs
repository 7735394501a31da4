//! Numerical kernels shared by the solvers: scalar proximal operators,
//! spectral projections, and the implicit conjugate-gradient solve.

mod cg;
mod prox;
mod spectral;

pub use cg::{solve_g_system, CgSettings};
pub use prox::{hinge_prox, shrink};
pub use spectral::{nearest_psd, nuclear_norm, svt, symmetric_eigen};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {relative_residual:.3e})")]
    CgDidNotConverge { iterations: usize, relative_residual: f64 },
    #[error("symmetric eigendecomposition failed to converge")]
    EigenFailed,
}
