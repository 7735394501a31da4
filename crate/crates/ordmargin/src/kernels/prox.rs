//! Scalar proximal operators, applied elementwise by the solvers.

/// Soft-thresholding `sign(u)·(|u| − τ)₊`.
pub fn shrink(u: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    u.signum() * (u.abs() - tau).max(0.0)
}

/// Minimizer of `(weight/mu)·(label·e)₊ + ½(e − s)²` over `e`.
///
/// With `τ = weight/mu` the closed form splits on `label·s`:
/// above `τ` the hinge is active and soft-thresholds, in `[0, τ]` the
/// minimizer sits at the kink, and below zero the hinge vanishes and the
/// quadratic wins.
pub fn hinge_prox(s: f64, label: i8, weight: f64, mu: f64) -> f64 {
    debug_assert!(weight >= 0.0);
    debug_assert!(mu > 0.0);
    let tau = weight / mu;
    let y = f64::from(label);
    let ys = y * s;
    if ys > tau {
        s - y * tau
    } else if ys >= 0.0 {
        0.0
    } else {
        s
    }
}
