//! Reference ordinal-embedding methods: hinge (GNMDS), logistic (STE), and
//! Student-t (TSTE) losses on the Gram matrix, minimized by gradient
//! descent with backtracking line search and a rank-`p` PSD projection
//! after every step.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::kernels::{symmetric_eigen, KernelError};
use crate::model::{ComparisonSet, Gram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineMethod {
    Gnmds,
    Ste,
    Tste,
}

impl BaselineMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineMethod::Gnmds => "gnmds",
            BaselineMethod::Ste => "ste",
            BaselineMethod::Tste => "tste",
        }
    }
}

/// Backtracking line-search parameters (Armijo condition).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub initial_step: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self { shrink: 0.5, sufficient_decrease: 1e-4, initial_step: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub target_rank: usize,
    /// Hinge target `γ₀` for GNMDS.
    pub margin_target: f64,
    /// Student-t degrees of freedom for TSTE; `None` means
    /// `max(target_rank − 1, 1)`.
    pub student_dof: Option<f64>,
    pub max_iterations: usize,
    /// Stop once the projected-gradient norm falls below this.
    pub gradient_tolerance: f64,
    pub line_search: LineSearch,
    /// Seed for the random PSD rank-`p` initialization.
    pub seed: u64,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod, target_rank: usize) -> Self {
        Self {
            method,
            target_rank,
            margin_target: 1.0,
            student_dof: None,
            max_iterations: 1000,
            gradient_tolerance: 1e-5,
            line_search: LineSearch::default(),
            seed: 0,
        }
    }

    pub fn student_dof(&self) -> f64 {
        self.student_dof
            .unwrap_or_else(|| ((self.target_rank as f64) - 1.0).max(1.0))
    }
}

/// Numerically stable `log(1 + exp(x))`.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Adds `w · ∂d²(a,b)/∂G` into the gradient accumulator.
fn add_pair_gradient(grad: &mut DMatrix<f64>, a: usize, b: usize, w: f64) {
    grad[(a, a)] += w;
    grad[(b, b)] += w;
    grad[(a, b)] -= w;
    grad[(b, a)] -= w;
}

/// Mean loss over the constraints and its exact gradient in `G`.
///
/// GNMDS: `mean_q (γ₀ − γ_q)₊`. STE: `mean_q log(1 + exp(−γ_q))`. TSTE:
/// `mean_q −log p_q` with the Student-t head-to-head probability of the
/// pair asserted more similar.
pub fn baseline_loss(
    config: &BaselineConfig,
    set: &ComparisonSet,
    g: &Gram,
) -> (f64, DMatrix<f64>) {
    let n = g.n();
    let m = set.len() as f64;
    let mut loss = 0.0;
    let mut grad = DMatrix::zeros(n, n);
    for (c, y) in set.iter() {
        let (first, second) = c.pairs();
        let d_first = g.squared_distance(first.0, first.1);
        let d_second = g.squared_distance(second.0, second.1);
        let y = f64::from(y);
        let gamma = y * (d_second - d_first);
        match config.method {
            BaselineMethod::Gnmds => {
                let slack = config.margin_target - gamma;
                if slack > 0.0 {
                    loss += slack;
                    // ∂γ/∂G = y(E_second − E_first); hinge active pushes −∂γ.
                    add_pair_gradient(&mut grad, first.0, first.1, y);
                    add_pair_gradient(&mut grad, second.0, second.1, -y);
                }
            }
            BaselineMethod::Ste => {
                loss += softplus(-gamma);
                let w = -sigmoid(-gamma) * y;
                add_pair_gradient(&mut grad, second.0, second.1, w);
                add_pair_gradient(&mut grad, first.0, first.1, -w);
            }
            BaselineMethod::Tste => {
                // The pair asserted more similar gets the numerator.
                let (sim, dis, d_sim, d_dis) = if y > 0.0 {
                    (first, second, d_first, d_second)
                } else {
                    (second, first, d_second, d_first)
                };
                let alpha = config.student_dof();
                let expo = -(alpha + 1.0) / 2.0;
                let u = 1.0 + d_sim / alpha;
                let v = 1.0 + d_dis / alpha;
                let fu = u.powf(expo);
                let fv = v.powf(expo);
                let p = fu / (fu + fv);
                loss += -p.ln();
                let coeff = (alpha + 1.0) / (2.0 * alpha);
                add_pair_gradient(&mut grad, sim.0, sim.1, coeff * (1.0 - p) / u);
                add_pair_gradient(&mut grad, dis.0, dis.1, -coeff * (1.0 - p) / v);
            }
        }
    }
    loss /= m;
    grad /= m;
    (loss, grad)
}

/// Loss only, for line-search trials.
pub fn baseline_loss_value(config: &BaselineConfig, set: &ComparisonSet, g: &Gram) -> f64 {
    // Gradient accumulation is cheap relative to the distance sweep; reuse
    // the single path to keep the two in lockstep.
    baseline_loss(config, set, g).0
}

/// Projects onto PSD matrices of rank at most `p`: keep the `p`
/// algebraically largest eigenvalues clamped at zero, drop the rest.
pub fn project_rank_psd(g: &DMatrix<f64>, p: usize) -> Result<DMatrix<f64>, KernelError> {
    let n = g.nrows();
    let (values, vectors) = symmetric_eigen(g)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut out = DMatrix::zeros(n, n);
    for &idx in order.iter().take(p.min(n)) {
        let lambda = values[idx].max(0.0);
        if lambda == 0.0 {
            continue;
        }
        let col = vectors.column(idx);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += lambda * col[r] * col[c];
            }
        }
    }
    Ok(out)
}

/// One line of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineIteration {
    pub iteration: usize,
    pub loss: f64,
    pub step: f64,
    pub projected_gradient_norm: f64,
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub gram: Gram,
    pub log: Vec<BaselineIteration>,
    pub converged: bool,
    /// Set when backtracking underflowed and the current iterate was
    /// returned as-is.
    pub line_search_failed: bool,
}

/// Projected gradient descent from a seeded random PSD rank-`p` start
/// (`X₀` standard normal scaled by `1/√n`, `G₀ = X₀ᵀX₀`). Deterministic
/// given the seed.
pub fn solve_baseline(
    set: &ComparisonSet,
    config: &BaselineConfig,
) -> Result<BaselineOutcome, KernelError> {
    assert!(config.student_dof() > 0.0);
    assert!(config.line_search.shrink > 0.0 && config.line_search.shrink < 1.0);
    assert!(config.line_search.initial_step > 0.0);
    let n = set.size().items();
    let p = config.target_rank;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let scale = 1.0 / (n as f64).sqrt();
    let x0 = DMatrix::from_fn(p, n, |_, _| {
        let v: f64 = rng.sample(StandardNormal);
        v * scale
    });
    let mut g = Gram::from_points(&x0);
    let mut log = Vec::new();
    let mut converged = false;
    let mut line_search_failed = false;

    for iteration in 0..config.max_iterations {
        let (loss, grad) = baseline_loss(config, set, &g);

        // Projected-gradient norm at the reference step.
        let reference = config.line_search.initial_step;
        let probe = project_rank_psd(&(g.matrix() - &grad * reference), p)?;
        let pg_norm = (g.matrix() - &probe).norm() / reference;
        if pg_norm <= config.gradient_tolerance {
            log.push(BaselineIteration { iteration, loss, step: 0.0, projected_gradient_norm: pg_norm });
            converged = true;
            break;
        }

        let mut step = config.line_search.initial_step;
        let mut accepted = None;
        while step >= 1e-12 {
            let trial_m = project_rank_psd(&(g.matrix() - &grad * step), p)?;
            let trial = Gram::from_matrix(trial_m).expect("square");
            let trial_loss = baseline_loss_value(config, set, &trial);
            let descent = grad
                .iter()
                .zip(g.matrix().iter().zip(trial.matrix().iter()))
                .map(|(gr, (a, b))| gr * (a - b))
                .sum::<f64>();
            if descent > 0.0
                && trial_loss <= loss - config.line_search.sufficient_decrease * descent
            {
                accepted = Some((trial, trial_loss));
                break;
            }
            step *= config.line_search.shrink;
        }

        match accepted {
            Some((trial, trial_loss)) => {
                g = trial;
                log.push(BaselineIteration {
                    iteration,
                    loss: trial_loss,
                    step,
                    projected_gradient_norm: pg_norm,
                });
            }
            None => {
                log.push(BaselineIteration { iteration, loss, step: 0.0, projected_gradient_norm: pg_norm });
                line_search_failed = true;
                break;
            }
        }
    }

    Ok(BaselineOutcome { gram: g, log, converged, line_search_failed })
}
