//! The empirical protocol: dataset generation and ingestion, train/test
//! splitting, repeated seeded runs per method and training size, and
//! aggregation into per-cell statistics.

mod dataset;
mod report;
mod runner;
mod seed;
mod synthetic;

pub use dataset::{load_triplet_file, split_train_test};
pub use report::{
    aggregate_csv, margins_csv, runs_csv, CellStats, ExperimentReport, RunRecord, TunedCell,
};
pub use runner::{run_plan, MethodSpec};
pub use seed::mix_seed;
pub use synthetic::{generate_synthetic, SyntheticSpec};

use std::path::PathBuf;

use thiserror::Error;

use crate::baselines::LineSearch;
use crate::dmoe::DmoeConfig;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("train size {requested} out of range (need 1..={available})", available = available - 1)]
    TrainSizeOutOfRange { requested: usize, available: usize },
    #[error("plan has no methods or no train sizes")]
    EmptyPlan,
    #[error("solver fault: {0}")]
    Solver(String),
}

/// Where the constraints come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    File { path: PathBuf, items: usize, index_base: usize },
}

/// Baseline knobs shared by the harness; per-run seeds are derived by the
/// runner.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTemplate {
    pub margin_target: f64,
    pub student_dof: Option<f64>,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub line_search: LineSearch,
}

impl Default for BaselineTemplate {
    fn default() -> Self {
        Self {
            margin_target: 1.0,
            student_dof: None,
            max_iterations: 1000,
            gradient_tolerance: 1e-5,
            line_search: LineSearch::default(),
        }
    }
}

/// A full benchmark: methods × train sizes × repeats over one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub dataset: DatasetSource,
    pub train_sizes: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    pub repeats: usize,
    pub embedding_dim: usize,
    pub master_seed: u64,
    /// Grid-search the regularization per (method, size) cell on a
    /// validation fifth of the first repeat's training split.
    pub tuning: bool,
    /// Histogram bin width for the per-run training-margin statistics.
    pub bin_width: f64,
    pub dmoe: DmoeConfig,
    pub baseline: BaselineTemplate,
}

impl ExperimentPlan {
    /// The study defaults: synthetic Gaussian data, all four methods,
    /// the three reported training sizes, ten repeats.
    pub fn synthetic_default() -> Self {
        Self {
            dataset: DatasetSource::Synthetic(SyntheticSpec::default()),
            train_sizes: vec![200, 1000, 10000],
            methods: vec![
                MethodSpec::Gnmds,
                MethodSpec::Ste,
                MethodSpec::Tste,
                MethodSpec::Dmoe,
            ],
            repeats: 10,
            embedding_dim: 10,
            master_seed: 2024,
            tuning: true,
            bin_width: 0.05,
            dmoe: DmoeConfig::with_rank(10),
            baseline: BaselineTemplate::default(),
        }
    }
}
