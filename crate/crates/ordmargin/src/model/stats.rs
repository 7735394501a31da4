//! Margin-distribution statistics and the held-out comparison error.

use super::{margin, ComparisonSet, Gram, ModelError};

/// First- and second-order statistics of the training margins plus a
/// fixed-width histogram spanning `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginStats {
    pub mean: f64,
    /// Population variance `(1/|Q|) Σ (γ_q − mean)²`.
    pub variance: f64,
    /// `(bin lower edge, count)` pairs; counts sum to the set size.
    pub histogram: Vec<(f64, usize)>,
    pub bin_width: f64,
}

impl MarginStats {
    /// Coefficient of variation `√variance / mean`; infinite for a zero
    /// mean with positive spread.
    pub fn coefficient_of_variation(&self) -> f64 {
        if self.mean == 0.0 {
            if self.variance == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.variance.sqrt() / self.mean
        }
    }
}

/// Margin mean, population variance, and histogram of `set` under `g`.
pub fn margin_stats(set: &ComparisonSet, g: &Gram, bin_width: f64) -> Result<MarginStats, ModelError> {
    if set.is_empty() {
        return Err(ModelError::EmptySet);
    }
    if !bin_width.is_finite() || bin_width <= 0.0 {
        return Err(ModelError::BadBinWidth(bin_width));
    }
    let margins = set.margins(g);
    let m = margins.len() as f64;
    let mean = margins.iter().sum::<f64>() / m;
    let variance = margins.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / m;

    let lo = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = (((hi - lo) / bin_width).ceil() as usize).max(1);
    let mut counts = vec![0usize; bins];
    for &v in &margins {
        let idx = (((v - lo) / bin_width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * bin_width, c))
        .collect();
    Ok(MarginStats { mean, variance, histogram, bin_width })
}

/// Fraction of constraints in `set` that `g` fails to satisfy. A margin of
/// exactly zero counts as an error, so the zero matrix scores 1.0.
pub fn generalization_error(set: &ComparisonSet, g: &Gram) -> Result<f64, ModelError> {
    if set.is_empty() {
        return Err(ModelError::EmptySet);
    }
    let errors = set
        .iter()
        .filter(|(c, y)| margin(c, *y, g) <= 0.0)
        .count();
    Ok(errors as f64 / set.len() as f64)
}
