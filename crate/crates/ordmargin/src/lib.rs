//! Ordinal embedding from pairwise-similarity comparisons, optimized for the
//! margin distribution of the training constraints.
//!
//! The central object is a Gram matrix `G` of the embedded points: every
//! squared distance is a linear functional of `G`, so a comparison
//! "pair (i,j) is more similar than pair (l,k)" becomes a linear inequality
//! and its *margin* (the signed gap between the two squared distances) is
//! linear in `G` as well.
//!
//! The crate provides:
//!
//! - [`model`]: comparison constraints, Gram matrices, margins, the sparse
//!   linear operator that maps `G` to per-constraint distance gaps, and
//!   evaluation metrics.
//! - [`kernels`]: proximal operators (soft-thresholding, hinge prox,
//!   singular-value thresholding, nearest-PSD projection) and a warm-started
//!   conjugate-gradient solve against the implicit normal operator.
//! - [`dmoe`]: the ADMM solver that drives all training margins toward a
//!   common target mean while penalizing deviation and nuclear norm.
//! - [`baselines`]: hinge (GNMDS), logistic (STE), and Student-t (TSTE)
//!   losses minimized by projected gradient descent with a rank-`p` PSD
//!   projection after every step.
//! - [`experiments`]: synthetic data generation, triplet-file ingestion,
//!   train/test splitting, and the seeded benchmark runner with CSV reports.

pub mod baselines;
pub mod dmoe;
pub mod experiments;
pub mod kernels;
pub mod model;

// Matrix types appear throughout the public API.
pub use nalgebra;

pub use model::{ComparisonSet, Constraint, Gram, ProblemSize, Quadruplet, Triplet};
