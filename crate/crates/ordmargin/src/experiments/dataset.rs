//! Triplet-file ingestion and seeded train/test splitting.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::model::{ComparisonSet, Constraint, ProblemSize, Triplet};

use super::ExperimentError;

/// Reads a triplet file: one record per line, three integer fields
/// separated by commas or whitespace, `#` comment lines, and an optional
/// `i,j,k` header. A record `a b c` asserts "a is closer to b than to c"
/// and is stored canonically with a `+1` label. `index_base` is subtracted
/// from every field on load. Duplicate records are kept.
pub fn load_triplet_file(
    path: &Path,
    items: usize,
    index_base: usize,
) -> Result<ComparisonSet, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |line: usize, message: String| ExperimentError::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut constraints = Vec::new();
    let mut saw_record = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if !saw_record && fields == ["i", "j", "k"] {
            continue;
        }
        saw_record = true;
        if fields.len() != 3 {
            return Err(malformed(
                line_no,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        }
        let mut parsed = [0usize; 3];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            let value: usize = field
                .parse()
                .map_err(|_| malformed(line_no, format!("bad integer {field:?}")))?;
            if value < index_base {
                return Err(malformed(
                    line_no,
                    format!("index {value} below declared base {index_base}"),
                ));
            }
            *slot = value - index_base;
        }
        let [a, b, c] = parsed;
        if let Some(&bad) = parsed.iter().find(|&&v| v >= items) {
            return Err(malformed(
                line_no,
                format!("index {bad} out of range for {items} items"),
            ));
        }
        let triplet = Triplet::new(a, b, c)
            .map_err(|e| malformed(line_no, e.to_string()))?;
        constraints.push(Constraint::from(triplet));
    }

    let dim = (items.saturating_sub(2)).max(1);
    let size = ProblemSize::new(items, dim.min(items - 2).max(1))
        .map_err(ExperimentError::Model)?;
    let labels = vec![1; constraints.len()];
    ComparisonSet::new(size, constraints, labels).map_err(ExperimentError::Model)
}

/// Uniform sample without replacement for the training set; the complement
/// (in original order) is the test set. Deterministic given the seed.
pub fn split_train_test(
    all: &ComparisonSet,
    train_size: usize,
    seed: u64,
) -> Result<(ComparisonSet, ComparisonSet), ExperimentError> {
    let total = all.len();
    if train_size == 0 || train_size >= total {
        return Err(ExperimentError::TrainSizeOutOfRange {
            requested: train_size,
            available: total,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: the first train_size slots end up a uniform
    // sample without replacement.
    let mut indices: Vec<usize> = (0..total).collect();
    for i in 0..train_size {
        let j = rng.random_range(i..total);
        indices.swap(i, j);
    }
    let mut train_idx: Vec<usize> = indices[..train_size].to_vec();
    train_idx.sort_unstable();
    let mut chosen = vec![false; total];
    for &i in &train_idx {
        chosen[i] = true;
    }
    let test_idx: Vec<usize> = (0..total).filter(|&i| !chosen[i]).collect();
    Ok((all.subset(&train_idx), all.subset(&test_idx)))
}
