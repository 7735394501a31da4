//! The sparse linear operator stacking one `vec(K_q)ᵀ` row per constraint.
//!
//! Each constraint `q` owns a symmetric matrix `K_q` with
//! `⟨K_q, G⟩ = d²(first) − d²(second)`; a quadruplet touches at most 16
//! entries of the `n×n` slot and a triplet at most 9 (the shared anchor
//! accumulates). The operator is only ever applied row-wise; neither the
//! stacked matrix nor its Gram product is formed densely.

use super::{ComparisonSet, Constraint, Gram, Quadruplet, Triplet};

/// Sign convention for the stacked rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrientation {
    /// Row applied to `G` yields `d²(first) − d²(second)`.
    FirstMinusSecond,
    /// Row applied to `G` yields `d²(second) − d²(first)`, so a
    /// `+1`-labeled satisfied constraint gets a positive value. Used by the
    /// solvers, where margins are `label × row value`.
    SecondMinusFirst,
}

/// Accumulates `±(E_first − E_second)` where `⟨E_ab, G⟩ = d²(a,b)`,
/// dropping entries that cancel exactly.
fn accumulate_row(
    first: (usize, usize),
    second: (usize, usize),
    sign: f64,
) -> Vec<(usize, usize, f64)> {
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(16);
    let mut add = |r: usize, c: usize, v: f64| {
        if let Some(e) = entries.iter_mut().find(|e| e.0 == r && e.1 == c) {
            e.2 += v;
        } else {
            entries.push((r, c, v));
        }
    };
    let (a, b) = first;
    add(a, a, sign);
    add(b, b, sign);
    add(a, b, -sign);
    add(b, a, -sign);
    let (l, k) = second;
    add(l, l, -sign);
    add(k, k, -sign);
    add(l, k, sign);
    add(k, l, sign);
    entries.retain(|e| e.2 != 0.0);
    entries.sort_by_key(|e| (e.1, e.0));
    entries
}

/// Sparse entries of `K_q` for a quadruplet, as `(row, col, coefficient)`
/// triples into the `n×n` matrix slot.
pub fn quadruplet_row(q: &Quadruplet, n: usize) -> Vec<(usize, usize, f64)> {
    debug_assert!(q.first.0.max(q.first.1).max(q.second.0).max(q.second.1) < n);
    accumulate_row(q.first, q.second, 1.0)
}

/// Sparse entries of `K_t` for a triplet; equals the quadruplet row of
/// `((anchor, near), (anchor, far))` after accumulation at the shared
/// anchor, leaving at most 9 nonzeros.
pub fn triplet_row(t: &Triplet, n: usize) -> Vec<(usize, usize, f64)> {
    debug_assert!(t.anchor.max(t.near).max(t.far) < n);
    let mut entries = vec![
        (t.anchor, t.near, -1.0),
        (t.near, t.anchor, -1.0),
        (t.near, t.near, 1.0),
        (t.anchor, t.far, 1.0),
        (t.far, t.anchor, 1.0),
        (t.far, t.far, -1.0),
    ];
    entries.sort_by_key(|e| (e.1, e.0));
    entries
}

/// The stacked constraint operator, stored as flattened sparse rows over
/// column-major `vec(G)` positions.
#[derive(Debug, Clone)]
pub struct DesignOperator {
    n: usize,
    offsets: Vec<u32>,
    positions: Vec<u32>,
    coefficients: Vec<f64>,
}

impl DesignOperator {
    pub fn new(set: &ComparisonSet, orientation: RowOrientation) -> Self {
        let n = set.size().items();
        let sign = match orientation {
            RowOrientation::FirstMinusSecond => 1.0,
            RowOrientation::SecondMinusFirst => -1.0,
        };
        let mut offsets = Vec::with_capacity(set.len() + 1);
        let mut positions = Vec::new();
        let mut coefficients = Vec::new();
        offsets.push(0u32);
        for c in set.constraints() {
            let entries = match c {
                Constraint::Quadruplet(q) => accumulate_row(q.first, q.second, sign),
                Constraint::Triplet(t) => accumulate_row(
                    (t.anchor, t.near),
                    (t.anchor, t.far),
                    sign,
                ),
            };
            for (r, col, v) in entries {
                positions.push((col * n + r) as u32);
                coefficients.push(v);
            }
            offsets.push(positions.len() as u32);
        }
        Self { n, offsets, positions, coefficients }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of constraint rows.
    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Applies row `q` to a flattened matrix.
    pub fn apply_row(&self, q: usize, v: &[f64]) -> f64 {
        let lo = self.offsets[q] as usize;
        let hi = self.offsets[q + 1] as usize;
        let mut acc = 0.0;
        for e in lo..hi {
            acc += self.coefficients[e] * v[self.positions[e] as usize];
        }
        acc
    }

    /// `out[q] = ⟨row_q, v⟩` for every constraint.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n * self.n);
        debug_assert_eq!(out.len(), self.rows());
        for (q, slot) in out.iter_mut().enumerate() {
            *slot = self.apply_row(q, v);
        }
    }

    /// `out += Σ_q u[q] · row_q`, scattering into the flattened matrix.
    pub fn apply_transpose_add(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.rows());
        debug_assert_eq!(out.len(), self.n * self.n);
        for (q, &w) in u.iter().enumerate() {
            let lo = self.offsets[q] as usize;
            let hi = self.offsets[q + 1] as usize;
            for e in lo..hi {
                out[self.positions[e] as usize] += w * self.coefficients[e];
            }
        }
    }

    /// Applies every row to a Gram matrix directly.
    pub fn apply_gram(&self, g: &Gram) -> Vec<f64> {
        let v = g.matrix().as_slice();
        let mut out = vec![0.0; self.rows()];
        self.apply(v, &mut out);
        out
    }
}
