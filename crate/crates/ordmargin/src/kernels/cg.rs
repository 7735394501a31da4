//! Conjugate gradients on the implicit normal operator `2(𝒦ᵀ𝒦 + I)`.
//!
//! The operator is applied as gather/scatter over the constraint rows, so
//! the `n²×n²` system matrix is never formed. The system is SPD with
//! smallest eigenvalue ≥ 2, so plain CG with a warm start across outer
//! iterations is enough.

use crate::model::DesignOperator;

use super::KernelError;

/// Settings for the Gram sub-problem solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    /// Stop once `‖rhs − A·v‖ ≤ relative_tolerance · ‖rhs‖`.
    pub relative_tolerance: f64,
    /// Iteration cap; `None` means `10·n²`.
    pub max_iterations: Option<usize>,
    /// Reuse the previous solution as the starting point when one is given.
    pub warm_start: bool,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            max_iterations: None,
            warm_start: true,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `out = 2(𝒦ᵀ(𝒦 v) + v)`, with `scratch` holding the row-space image.
fn normal_apply(op: &DesignOperator, v: &[f64], scratch: &mut [f64], out: &mut [f64]) {
    op.apply(v, scratch);
    out.copy_from_slice(v);
    op.apply_transpose_add(scratch, out);
    for o in out.iter_mut() {
        *o *= 2.0;
    }
}

/// Solves `2(𝒦ᵀ𝒦 + I)·v = rhs` to the requested relative residual,
/// then symmetrizes the solution viewed as an `n×n` matrix.
pub fn solve_g_system(
    op: &DesignOperator,
    rhs: &[f64],
    settings: &CgSettings,
    warm_start: Option<&[f64]>,
) -> Result<Vec<f64>, KernelError> {
    let n = op.n();
    let dim = n * n;
    assert_eq!(rhs.len(), dim, "right-hand side must have length n²");
    assert!(settings.relative_tolerance > 0.0);
    let max_iterations = settings.max_iterations.unwrap_or(10 * dim).max(1);

    let rhs_norm = norm(rhs);
    if rhs_norm == 0.0 {
        return Ok(vec![0.0; dim]);
    }
    let target = settings.relative_tolerance * rhs_norm;

    let mut v = match warm_start {
        Some(start) if settings.warm_start => {
            assert_eq!(start.len(), dim);
            start.to_vec()
        }
        _ => vec![0.0; dim],
    };

    let mut scratch = vec![0.0; op.rows()];
    let mut av = vec![0.0; dim];
    normal_apply(op, &v, &mut scratch, &mut av);

    let mut residual: Vec<f64> = rhs.iter().zip(&av).map(|(b, a)| b - a).collect();
    let mut direction = residual.clone();
    let mut rr = dot(&residual, &residual);

    let mut iterations = 0;
    while rr.sqrt() > target {
        if iterations >= max_iterations {
            return Err(KernelError::CgDidNotConverge {
                iterations,
                relative_residual: rr.sqrt() / rhs_norm,
            });
        }
        normal_apply(op, &direction, &mut scratch, &mut av);
        let alpha = rr / dot(&direction, &av);
        if !alpha.is_finite() {
            return Err(KernelError::CgDidNotConverge {
                iterations,
                relative_residual: rr.sqrt() / rhs_norm,
            });
        }
        for i in 0..dim {
            v[i] += alpha * direction[i];
            residual[i] -= alpha * av[i];
        }
        iterations += 1;
        // Recurrence residuals drift; recompute the true residual
        // periodically and at acceptance.
        if iterations % 64 == 0 {
            normal_apply(op, &v, &mut scratch, &mut av);
            for i in 0..dim {
                residual[i] = rhs[i] - av[i];
            }
        }
        let rr_next = dot(&residual, &residual);
        let beta = rr_next / rr;
        for i in 0..dim {
            direction[i] = residual[i] + beta * direction[i];
        }
        rr = rr_next;
    }

    normal_apply(op, &v, &mut scratch, &mut av);
    let true_residual = rhs
        .iter()
        .zip(&av)
        .map(|(b, a)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    if true_residual > 10.0 * target {
        return Err(KernelError::CgDidNotConverge {
            iterations,
            relative_residual: true_residual / rhs_norm,
        });
    }

    for r in 0..n {
        for c in (r + 1)..n {
            let avg = 0.5 * (v[c * n + r] + v[r * n + c]);
            v[c * n + r] = avg;
            v[r * n + c] = avg;
        }
    }
    Ok(v)
}
