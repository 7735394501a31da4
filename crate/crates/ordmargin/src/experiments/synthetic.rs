//! Seeded Gaussian point clouds and their complete triplet labelings.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::model::{ComparisonSet, Constraint, Gram, ProblemSize, Triplet};

/// Synthetic dataset parameters: `items` points in `ambient_dim`
/// dimensions, coordinates drawn from `N(0, covariance_scale · I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub items: usize,
    pub ambient_dim: usize,
    pub covariance_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { items: 100, ambient_dim: 10, covariance_scale: 1.0 / 20.0, seed: 7 }
    }
}

/// Draws the points and enumerates every canonical triplet: for each anchor
/// `i` and unordered pair `{j, k}`, the closer item is stored as `near`
/// with a `+1` label. Ties keep the lower index as `near`. Deterministic
/// given the seed; yields `items · C(items−1, 2)` constraints.
pub fn generate_synthetic(spec: &SyntheticSpec) -> (DMatrix<f64>, ComparisonSet) {
    let n = spec.items;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let sd = spec.covariance_scale.sqrt();
    let points = DMatrix::from_fn(spec.ambient_dim, n, |_, _| {
        let v: f64 = rng.sample(StandardNormal);
        v * sd
    });
    let gram = Gram::from_points(&points);
    let dim = spec.ambient_dim.min(n.saturating_sub(2)).max(1);
    let size = ProblemSize::new(n, dim).expect("spec dimensions are validated by construction");

    let mut constraints = Vec::with_capacity(n * (n - 1) * (n - 2) / 2);
    for anchor in 0..n {
        for j in 0..n {
            if j == anchor {
                continue;
            }
            for k in (j + 1)..n {
                if k == anchor {
                    continue;
                }
                let dj = gram.squared_distance(anchor, j);
                let dk = gram.squared_distance(anchor, k);
                let (near, far) = if dj <= dk { (j, k) } else { (k, j) };
                constraints.push(Constraint::from(
                    Triplet::new(anchor, near, far).expect("indices are distinct"),
                ));
            }
        }
    }
    let labels = vec![1; constraints.len()];
    let set = ComparisonSet::new(size, constraints, labels)
        .expect("generated constraints are valid");
    (points, set)
}
