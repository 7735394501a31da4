//! Domain types for comparison-based embedding: items, ordinal constraints,
//! Gram matrices, margins, and the linear operators connecting them.
//!
//! Orientation convention used throughout the crate: a constraint stores the
//! pair asserted to be *more* similar first, and a `+1` label affirms that
//! assertion. A constraint is satisfied by an embedding exactly when its
//! margin, the label times (second pair squared distance minus first
//! pair squared distance), is strictly positive.

mod gram;
mod operator;
mod stats;

pub use gram::{gram_to_embedding, Gram};
pub use operator::{quadruplet_row, triplet_row, DesignOperator, RowOrientation};
pub use stats::{generalization_error, margin_stats, MarginStats};

use thiserror::Error;

/// Errors from constructing or validating the domain types.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("need at least 3 items, got {0}")]
    TooFewItems(usize),
    #[error("embedding dimension {dim} not in 1..={max} for {items} items")]
    BadDimension { dim: usize, max: usize, items: usize },
    #[error("item index {index} out of range for {items} items")]
    IndexOutOfRange { index: usize, items: usize },
    #[error("degenerate constraint: {0}")]
    DegenerateConstraint(String),
    #[error("label must be +1 or -1, got {0}")]
    InvalidLabel(i8),
    #[error("{constraints} constraints but {labels} labels")]
    LengthMismatch { constraints: usize, labels: usize },
    #[error("constraint list mixes triplets and quadruplets")]
    MixedConstraintKinds,
    #[error("operation requires a nonempty comparison set")]
    EmptySet,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("histogram bin width must be positive, got {0}")]
    BadBinWidth(f64),
}

/// Number of objects and the target embedding dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSize {
    items: usize,
    dim: usize,
}

impl ProblemSize {
    /// A valid size has at least 3 items (the smallest set a triplet can
    /// compare) and a target dimension in `1..=items-2`.
    pub fn new(items: usize, dim: usize) -> Result<Self, ModelError> {
        if items < 3 {
            return Err(ModelError::TooFewItems(items));
        }
        if dim == 0 || dim > items - 2 {
            return Err(ModelError::BadDimension { dim, max: items - 2, items });
        }
        Ok(Self { items, dim })
    }

    /// Number of objects being embedded.
    pub fn items(&self) -> usize {
        self.items
    }

    /// Target embedding dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Comparison of two item pairs: "`first` is more similar than `second`"
/// when affirmed by a `+1` label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadruplet {
    pub first: (usize, usize),
    pub second: (usize, usize),
}

impl Quadruplet {
    pub fn new(first: (usize, usize), second: (usize, usize)) -> Result<Self, ModelError> {
        let q = Self { first, second };
        q.validate_shape()?;
        Ok(q)
    }

    fn validate_shape(&self) -> Result<(), ModelError> {
        if self.first.0 == self.first.1 || self.second.0 == self.second.1 {
            return Err(ModelError::DegenerateConstraint(format!(
                "pair compares an item with itself: {:?} vs {:?}",
                self.first, self.second
            )));
        }
        let unordered = |(a, b): (usize, usize)| if a <= b { (a, b) } else { (b, a) };
        if unordered(self.first) == unordered(self.second) {
            return Err(ModelError::DegenerateConstraint(format!(
                "both sides are the same pair: {:?} vs {:?}",
                self.first, self.second
            )));
        }
        Ok(())
    }

    fn max_index(&self) -> usize {
        self.first
            .0
            .max(self.first.1)
            .max(self.second.0)
            .max(self.second.1)
    }
}

/// Triple comparison: "`anchor` is closer to `near` than to `far`" when
/// affirmed by a `+1` label. Semantically the quadruplet
/// `((anchor, near), (anchor, far))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub anchor: usize,
    pub near: usize,
    pub far: usize,
}

impl Triplet {
    pub fn new(anchor: usize, near: usize, far: usize) -> Result<Self, ModelError> {
        if anchor == near || anchor == far || near == far {
            return Err(ModelError::DegenerateConstraint(format!(
                "triplet indices must be distinct: ({anchor}, {near}, {far})"
            )));
        }
        Ok(Self { anchor, near, far })
    }

    pub fn as_quadruplet(&self) -> Quadruplet {
        Quadruplet {
            first: (self.anchor, self.near),
            second: (self.anchor, self.far),
        }
    }

    fn max_index(&self) -> usize {
        self.anchor.max(self.near).max(self.far)
    }
}

/// A single ordinal constraint of either arity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Quadruplet(Quadruplet),
    Triplet(Triplet),
}

impl Constraint {
    /// The compared pairs, more-similar side first.
    pub fn pairs(&self) -> ((usize, usize), (usize, usize)) {
        match self {
            Constraint::Quadruplet(q) => (q.first, q.second),
            Constraint::Triplet(t) => ((t.anchor, t.near), (t.anchor, t.far)),
        }
    }

    fn max_index(&self) -> usize {
        match self {
            Constraint::Quadruplet(q) => q.max_index(),
            Constraint::Triplet(t) => t.max_index(),
        }
    }

    fn is_triplet(&self) -> bool {
        matches!(self, Constraint::Triplet(_))
    }
}

impl From<Triplet> for Constraint {
    fn from(t: Triplet) -> Self {
        Constraint::Triplet(t)
    }
}

impl From<Quadruplet> for Constraint {
    fn from(q: Quadruplet) -> Self {
        Constraint::Quadruplet(q)
    }
}

/// An ordered, homogeneous list of labeled ordinal constraints over a fixed
/// item set. Duplicate constraints are permitted and counted with
/// multiplicity. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSet {
    size: ProblemSize,
    constraints: Vec<Constraint>,
    labels: Vec<i8>,
}

impl ComparisonSet {
    pub fn new(
        size: ProblemSize,
        constraints: Vec<Constraint>,
        labels: Vec<i8>,
    ) -> Result<Self, ModelError> {
        if constraints.len() != labels.len() {
            return Err(ModelError::LengthMismatch {
                constraints: constraints.len(),
                labels: labels.len(),
            });
        }
        if let Some(first) = constraints.first() {
            let triplets = first.is_triplet();
            if constraints.iter().any(|c| c.is_triplet() != triplets) {
                return Err(ModelError::MixedConstraintKinds);
            }
        }
        for c in &constraints {
            if c.max_index() >= size.items() {
                return Err(ModelError::IndexOutOfRange {
                    index: c.max_index(),
                    items: size.items(),
                });
            }
            if let Constraint::Quadruplet(q) = c {
                q.validate_shape()?;
            }
        }
        for &y in &labels {
            if y != 1 && y != -1 {
                return Err(ModelError::InvalidLabel(y));
            }
        }
        Ok(Self { size, constraints, labels })
    }

    /// Convenience constructor for an all-triplet set with `+1` labels.
    pub fn from_triplets(size: ProblemSize, triplets: Vec<Triplet>) -> Result<Self, ModelError> {
        let labels = vec![1; triplets.len()];
        let constraints = triplets.into_iter().map(Constraint::from).collect();
        Self::new(size, constraints, labels)
    }

    pub fn size(&self) -> ProblemSize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Constraint, i8)> {
        self.constraints.iter().zip(self.labels.iter().copied())
    }

    /// The subset selected by `indices` (kept in the given order).
    pub fn subset(&self, indices: &[usize]) -> ComparisonSet {
        let constraints = indices.iter().map(|&i| self.constraints[i]).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        ComparisonSet { size: self.size, constraints, labels }
    }

    /// The same constraints with every label flipped and every pair order
    /// swapped; an equivalent description of the same comparisons.
    pub fn relabeled_swapped(&self) -> ComparisonSet {
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                let (first, second) = c.pairs();
                Constraint::Quadruplet(Quadruplet { first: second, second: first })
            })
            .collect();
        let labels = self.labels.iter().map(|&y| -y).collect();
        ComparisonSet { size: self.size, constraints, labels }
    }

    /// Margin of every constraint under `g`.
    pub fn margins(&self, g: &Gram) -> Vec<f64> {
        self.iter().map(|(c, y)| margin(c, y, g)).collect()
    }
}

/// Distance gap `Δ_q G = d²(first) − d²(second)` of a constraint under `g`.
/// Negative when a `+1`-labeled constraint is satisfied.
pub fn distance_gap(c: &Constraint, g: &Gram) -> f64 {
    let (first, second) = c.pairs();
    g.squared_distance(first.0, first.1) - g.squared_distance(second.0, second.1)
}

/// Margin `γ_q = y·(d²(second) − d²(first))`; strictly positive exactly when
/// the constraint is satisfied.
pub fn margin(c: &Constraint, label: i8, g: &Gram) -> f64 {
    -f64::from(label) * distance_gap(c, g)
}
