//! ADMM solver for margin-distribution ordinal embedding.
//!
//! The program splits the two-sided margin loss
//! `Σ_q (γ̃₀ − γ_q)₊ + ν·Σ_q (γ_q − γ̃₀)₊ + λ‖G‖_*` over a consensus Gram
//! variable `G` with copies `G₁` (carrying the nuclear norm), `G₂`
//! (constrained PSD), and slack vectors `e₁ = e_Q`, `e₂ = −e_Q`, where
//! `e_Q = y ⊙ γ̃₀ − 𝒦·vec(G)` holds the per-constraint margin residuals.
//! Each outer iteration minimizes the augmented Lagrangian block by block:
//! the `e` blocks are elementwise hinge proxes, the `G` block is a
//! conjugate-gradient solve against the implicit normal operator
//! `2(𝒦ᵀ𝒦 + I)`, `G₁` is a singular-value threshold, and `G₂` a
//! nearest-PSD projection; dual ascent then updates the multipliers and
//! grows the penalty `μ` geometrically.
//!
//! The hard rank constraint is carried entirely by the nuclear-norm term;
//! the rank-`p` cut happens only when the returned Gram matrix is factored
//! into points.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::kernels::{
    hinge_prox, nearest_psd, nuclear_norm, solve_g_system, svt, CgSettings, KernelError,
};
use crate::model::{ComparisonSet, DesignOperator, Gram, ModelError, RowOrientation};

#[derive(Debug, Error, PartialEq)]
pub enum DmoeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Hyperparameters and iteration budgets for the ADMM solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DmoeConfig {
    /// Target margin mean `γ̃₀`. Any positive value is equivalent up to a
    /// rescaling of the Gram matrix.
    pub margin_target: f64,
    /// Weight `ν` on margins exceeding the target.
    pub deviation_weight: f64,
    /// Nuclear-norm weight `λ`.
    pub nuclear_weight: f64,
    /// Initial penalty `μ₀`.
    pub penalty_start: f64,
    /// Geometric penalty growth `ρ > 1`.
    pub penalty_growth: f64,
    /// Penalty cap.
    pub penalty_cap: f64,
    /// Stop when the objective changes less than this between iterations.
    pub objective_tolerance: f64,
    /// Also require every primal residual below this before declaring
    /// convergence.
    pub residual_tolerance: f64,
    pub max_outer_iterations: usize,
    /// Embedding dimension used when factoring the result into points.
    pub target_rank: usize,
    pub cg: CgSettings,
}

impl Default for DmoeConfig {
    fn default() -> Self {
        Self {
            margin_target: 1.0,
            deviation_weight: 1.0,
            nuclear_weight: 0.01,
            penalty_start: 1.0,
            penalty_growth: 1.05,
            penalty_cap: 1e8,
            objective_tolerance: 1e-3,
            residual_tolerance: 1e-3,
            max_outer_iterations: 500,
            target_rank: 2,
            cg: CgSettings::default(),
        }
    }
}

impl DmoeConfig {
    pub fn with_rank(target_rank: usize) -> Self {
        Self { target_rank, ..Self::default() }
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTrace {
    pub objective: f64,
    /// `‖e₁ − e_Q‖`, `‖e₂ + e_Q‖`, `‖G − G₁‖_F`, `‖G − G₂‖_F`.
    pub residuals: [f64; 4],
    pub mu: f64,
}

/// All ADMM iterates. `g_psd` is PSD at every iteration end and `mu` is
/// non-decreasing up to its cap.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub g: DMatrix<f64>,
    /// Copy of `G` carrying the nuclear-norm term.
    pub g_nuclear: DMatrix<f64>,
    /// Copy of `G` constrained to the PSD cone.
    pub g_psd: DMatrix<f64>,
    /// Hinge-side copy of the margin residuals.
    pub e1: DVector<f64>,
    /// Deviation-side copy (tracks `−e_Q`).
    pub e2: DVector<f64>,
    pub dual_e1: DVector<f64>,
    pub dual_e2: DVector<f64>,
    pub dual_nuclear: DMatrix<f64>,
    pub dual_psd: DMatrix<f64>,
    pub mu: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_history: Vec<f64>,
    pub trace: Vec<IterationTrace>,
}

impl SolverState {
    fn new(n: usize, m: usize, mu: f64) -> Self {
        Self {
            g: DMatrix::zeros(n, n),
            g_nuclear: DMatrix::zeros(n, n),
            g_psd: DMatrix::zeros(n, n),
            e1: DVector::zeros(m),
            e2: DVector::zeros(m),
            dual_e1: DVector::zeros(m),
            dual_e2: DVector::zeros(m),
            dual_nuclear: DMatrix::zeros(n, n),
            dual_psd: DMatrix::zeros(n, n),
            mu,
            iterations: 0,
            converged: false,
            objective_history: Vec::new(),
            trace: Vec::new(),
        }
    }

    /// Final primal residual norms, in the order
    /// (`e₁`, `e₂`, `G−G₁`, `G−G₂`).
    pub fn final_residuals(&self) -> [f64; 4] {
        self.trace.last().map(|t| t.residuals).unwrap_or([0.0; 4])
    }
}

/// Result of a solve: the PSD-projected model plus the full state for
/// diagnostics.
#[derive(Debug, Clone)]
pub struct DmoeSolution {
    pub gram: Gram,
    pub state: SolverState,
}

/// A failed solve still hands back the iterates so callers can keep the
/// partial convergence log.
#[derive(Debug)]
pub struct DmoeFailure {
    pub error: DmoeError,
    pub state: SolverState,
}

/// The ADMM solver for one comparison set. Solves are deterministic given
/// `(set, config)`; independent solves share no mutable state.
pub struct DmoeSolver<'a> {
    set: &'a ComparisonSet,
    op: DesignOperator,
    labels: Vec<f64>,
    config: DmoeConfig,
}

impl<'a> DmoeSolver<'a> {
    pub fn new(set: &'a ComparisonSet, config: DmoeConfig) -> Self {
        assert!(config.penalty_growth > 1.0, "penalty growth must exceed 1");
        assert!(config.penalty_start > 0.0 && config.margin_target > 0.0);
        assert!(config.deviation_weight >= 0.0 && config.nuclear_weight >= 0.0);
        assert!(config.objective_tolerance > 0.0 && config.residual_tolerance > 0.0);
        let op = DesignOperator::new(set, RowOrientation::SecondMinusFirst);
        let labels = set.labels().iter().map(|&y| f64::from(y)).collect();
        Self { set, op, labels, config }
    }

    pub fn config(&self) -> &DmoeConfig {
        &self.config
    }

    pub fn operator(&self) -> &DesignOperator {
        &self.op
    }

    /// Margin residuals `e_Q = y ⊙ γ̃₀ − 𝒦·vec(G)`, recomputed exactly from
    /// the current Gram iterate. Identity: `y_q·e_q = γ̃₀ − γ_q`.
    pub fn margin_residuals(&self, g: &DMatrix<f64>) -> DVector<f64> {
        let mut vals = vec![0.0; self.op.rows()];
        self.op.apply(g.as_slice(), &mut vals);
        DVector::from_iterator(
            vals.len(),
            vals.iter()
                .zip(&self.labels)
                .map(|(&gap, &y)| y * self.config.margin_target - gap),
        )
    }

    /// Elementwise hinge prox of `s₁ = e_Q − z₁/μ` with unit weight.
    pub fn update_e1(&self, state: &SolverState, e_q: &DVector<f64>) -> DVector<f64> {
        let mu = state.mu;
        DVector::from_iterator(
            e_q.len(),
            (0..e_q.len()).map(|q| {
                let s = e_q[q] - state.dual_e1[q] / mu;
                hinge_prox(s, self.set.labels()[q], 1.0, mu)
            }),
        )
    }

    /// Elementwise hinge prox of `s₂ = −e_Q − z₂/μ` with weight `ν`.
    pub fn update_e2(&self, state: &SolverState, e_q: &DVector<f64>) -> DVector<f64> {
        let mu = state.mu;
        let nu = self.config.deviation_weight;
        DVector::from_iterator(
            e_q.len(),
            (0..e_q.len()).map(|q| {
                let s = -e_q[q] - state.dual_e2[q] / mu;
                hinge_prox(s, self.set.labels()[q], nu, mu)
            }),
        )
    }

    /// Right-hand side of the stationarity system
    /// `2(𝒦ᵀ𝒦 + I)·vec(G) = 𝒦ᵀ(2y⊙Γ₀ − e₁ − z₁/μ + e₂ + z₂/μ)
    ///                      + vec(G₁ − Z₃/μ + G₂ − Z₄/μ)`.
    fn g_rhs(&self, state: &SolverState) -> Vec<f64> {
        let n = self.op.n();
        let mu = state.mu;
        let gamma0 = self.config.margin_target;
        let row_weights: Vec<f64> = (0..self.op.rows())
            .map(|q| {
                2.0 * self.labels[q] * gamma0 - state.e1[q] - state.dual_e1[q] / mu
                    + state.e2[q]
                    + state.dual_e2[q] / mu
            })
            .collect();
        let mut rhs = vec![0.0; n * n];
        self.op.apply_transpose_add(&row_weights, &mut rhs);
        let g1 = state.g_nuclear.as_slice();
        let g2 = state.g_psd.as_slice();
        let d1 = state.dual_nuclear.as_slice();
        let d2 = state.dual_psd.as_slice();
        for i in 0..n * n {
            rhs[i] += g1[i] - d1[i] / mu + g2[i] - d2[i] / mu;
        }
        rhs
    }

    /// Solves the `G` block, warm-started from the previous iterate. On CG
    /// failure the tolerance is loosened once before giving up.
    pub fn update_g(&self, state: &SolverState) -> Result<DMatrix<f64>, DmoeError> {
        let n = self.op.n();
        let rhs = self.g_rhs(state);
        let warm = state.g.as_slice();
        let solved = match solve_g_system(&self.op, &rhs, &self.config.cg, Some(warm)) {
            Ok(v) => v,
            Err(KernelError::CgDidNotConverge { .. }) => {
                let relaxed = CgSettings {
                    relative_tolerance: self.config.cg.relative_tolerance * 100.0,
                    ..self.config.cg
                };
                solve_g_system(&self.op, &rhs, &relaxed, Some(warm))?
            }
            Err(e) => return Err(e.into()),
        };
        Ok(DMatrix::from_column_slice(n, n, &solved))
    }

    /// `G₁ ← svt(G + Z₃/μ, λ/μ)`, using the freshly updated `G`.
    pub fn update_g_nuclear(&self, state: &SolverState) -> Result<DMatrix<f64>, DmoeError> {
        let arg = &state.g + &state.dual_nuclear / state.mu;
        Ok(svt(&arg, self.config.nuclear_weight / state.mu)?)
    }

    /// `G₂ ← nearestPsd(G + Z₄/μ)`.
    pub fn update_g_psd(&self, state: &SolverState) -> Result<DMatrix<f64>, DmoeError> {
        let arg = &state.g + &state.dual_psd / state.mu;
        Ok(nearest_psd(&arg)?)
    }

    /// Dual ascent on all four multipliers followed by the penalty growth
    /// `μ ← min(ρμ, μ_max)`. Expects `e_q` recomputed from the new `G`.
    /// Returns the primal residual norms.
    pub fn update_multipliers(&self, state: &mut SolverState, e_q: &DVector<f64>) -> [f64; 4] {
        let mu = state.mu;
        let r_e1 = &state.e1 - e_q;
        let r_e2 = &state.e2 + e_q;
        let r_g1 = &state.g - &state.g_nuclear;
        let r_g2 = &state.g - &state.g_psd;
        state.dual_e1 += &r_e1 * mu;
        state.dual_e2 += &r_e2 * mu;
        state.dual_nuclear += &r_g1 * mu;
        state.dual_psd += &r_g2 * mu;
        state.mu = (mu * self.config.penalty_growth).min(self.config.penalty_cap);
        [r_e1.norm(), r_e2.norm(), r_g1.norm(), r_g2.norm()]
    }

    /// Constraint-substituted objective
    /// `Σ(y⊙e_Q)₊ + ν·Σ(y⊙(−e_Q))₊ + λ‖G₁‖_*`, i.e. the model loss with
    /// the splitting slack removed.
    pub fn objective(&self, state: &SolverState, e_q: &DVector<f64>) -> Result<f64, DmoeError> {
        let nu = self.config.deviation_weight;
        let mut hinge = 0.0;
        let mut excess = 0.0;
        for q in 0..e_q.len() {
            let ye = self.labels[q] * e_q[q];
            hinge += ye.max(0.0);
            excess += (-ye).max(0.0);
        }
        let nuclear = if self.config.nuclear_weight > 0.0 {
            self.config.nuclear_weight * nuclear_norm(&state.g_nuclear)?
        } else {
            0.0
        };
        Ok(hinge + nu * excess + nuclear)
    }

    /// One full outer iteration in the order
    /// `e₁, e₂ → G → G₁, G₂ → e_Q → multipliers, μ`.
    pub fn step(&self, state: &mut SolverState) -> Result<(), DmoeError> {
        let e_q = self.margin_residuals(&state.g);
        state.e1 = self.update_e1(state, &e_q);
        state.e2 = self.update_e2(state, &e_q);
        state.g = self.update_g(state)?;
        state.g_nuclear = self.update_g_nuclear(state)?;
        state.g_psd = self.update_g_psd(state)?;
        let e_q = self.margin_residuals(&state.g);
        let residuals = self.update_multipliers(state, &e_q);
        let objective = self.objective(state, &e_q)?;
        state.objective_history.push(objective);
        state.trace.push(IterationTrace { objective, residuals, mu: state.mu });
        state.iterations += 1;
        Ok(())
    }

    /// Runs from `G₀ = 0` with zero multipliers until the objective change
    /// drops below tolerance with feasible residuals, or the iteration cap.
    /// Hitting the cap is reported through `state.converged`, not an error;
    /// numerical faults return the iterates accumulated so far.
    pub fn solve(&self) -> Result<DmoeSolution, Box<DmoeFailure>> {
        if self.set.is_empty() {
            return Err(Box::new(DmoeFailure {
                error: DmoeError::Model(ModelError::EmptySet),
                state: SolverState::new(self.set.size().items(), 0, self.config.penalty_start),
            }));
        }
        let n = self.set.size().items();
        let mut state = SolverState::new(n, self.set.len(), self.config.penalty_start);
        while state.iterations < self.config.max_outer_iterations {
            if let Err(error) = self.step(&mut state) {
                return Err(Box::new(DmoeFailure { error, state }));
            }
            let h = &state.objective_history;
            if h.len() >= 2 {
                let delta = (h[h.len() - 1] - h[h.len() - 2]).abs();
                let feasible = state
                    .final_residuals()
                    .iter()
                    .all(|&r| r <= self.config.residual_tolerance);
                if delta < self.config.objective_tolerance && feasible {
                    state.converged = true;
                    break;
                }
            }
        }
        match nearest_psd(&state.g) {
            Ok(projected) => {
                let gram = Gram::from_matrix(projected).expect("square by construction");
                Ok(DmoeSolution { gram, state })
            }
            Err(e) => Err(Box::new(DmoeFailure { error: e.into(), state })),
        }
    }
}

/// Convenience wrapper: build a solver and run it, dropping the partial
/// state on failure.
pub fn solve_dmoe(set: &ComparisonSet, config: DmoeConfig) -> Result<DmoeSolution, DmoeError> {
    DmoeSolver::new(set, config).solve().map_err(|f| f.error)
}
