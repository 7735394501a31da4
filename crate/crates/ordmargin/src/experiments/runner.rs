//! Executes a benchmark plan: per-cell hyperparameter tuning, repeated
//! seeded runs, and order-independent aggregation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::baselines::{solve_baseline, BaselineConfig, BaselineMethod};
use crate::dmoe::{solve_dmoe, DmoeConfig};
use crate::model::{generalization_error, margin_stats, ComparisonSet, Gram};

use super::dataset::split_train_test;
use super::report::{ExperimentReport, RunRecord, TunedCell};
use super::seed::{mix_seed, sub_seed};
use super::synthetic::generate_synthetic;
use super::{DatasetSource, ExperimentError, ExperimentPlan};

/// Regularization grids searched when tuning is enabled. The λ tail and
/// the ν=0.25 notch matter at large training sizes, where strong rank
/// pressure and a lopsided deviation weight carry the generalization.
const DMOE_LAMBDA_GRID: [f64; 6] = [1e-3, 1e-2, 1e-1, 1.0, 3.0, 10.0];
const DMOE_NU_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
const GNMDS_GAMMA_GRID: [f64; 2] = [0.1, 1.0];

/// Which method a benchmark cell trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodSpec {
    Dmoe,
    Gnmds,
    Ste,
    Tste,
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Dmoe => "dmoe",
            MethodSpec::Gnmds => "gnmds",
            MethodSpec::Ste => "ste",
            MethodSpec::Tste => "tste",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "dmoe" => Some(MethodSpec::Dmoe),
            "gnmds" => Some(MethodSpec::Gnmds),
            "ste" => Some(MethodSpec::Ste),
            "tste" => Some(MethodSpec::Tste),
            _ => None,
        }
    }

    fn baseline_method(&self) -> Option<BaselineMethod> {
        match self {
            MethodSpec::Dmoe => None,
            MethodSpec::Gnmds => Some(BaselineMethod::Gnmds),
            MethodSpec::Ste => Some(BaselineMethod::Ste),
            MethodSpec::Tste => Some(BaselineMethod::Tste),
        }
    }
}

/// Hyperparameters chosen for one (method, size) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CellParams {
    lambda: f64,
    nu: f64,
    gamma0: f64,
}

fn dmoe_config(plan: &ExperimentPlan, params: CellParams) -> DmoeConfig {
    DmoeConfig {
        nuclear_weight: params.lambda,
        deviation_weight: params.nu,
        target_rank: plan.embedding_dim,
        ..plan.dmoe.clone()
    }
}

fn baseline_config(
    plan: &ExperimentPlan,
    method: BaselineMethod,
    params: CellParams,
    seed: u64,
) -> BaselineConfig {
    BaselineConfig {
        method,
        target_rank: plan.embedding_dim,
        margin_target: params.gamma0,
        student_dof: plan.baseline.student_dof,
        max_iterations: plan.baseline.max_iterations,
        gradient_tolerance: plan.baseline.gradient_tolerance,
        line_search: plan.baseline.line_search,
        seed,
    }
}

struct TrainedModel {
    gram: Gram,
    iterations: usize,
    converged: bool,
}

fn train(
    plan: &ExperimentPlan,
    method: MethodSpec,
    params: CellParams,
    train_set: &ComparisonSet,
    run_seed: u64,
) -> Result<TrainedModel, ExperimentError> {
    match method.baseline_method() {
        None => {
            let config = dmoe_config(plan, params);
            let solution = solve_dmoe(train_set, config)
                .map_err(|e| ExperimentError::Solver(e.to_string()))?;
            Ok(TrainedModel {
                gram: solution.gram,
                iterations: solution.state.iterations,
                converged: solution.state.converged,
            })
        }
        Some(base) => {
            let config = baseline_config(plan, base, params, sub_seed(run_seed, "init"));
            let outcome = solve_baseline(train_set, &config)
                .map_err(|e| ExperimentError::Solver(e.to_string()))?;
            Ok(TrainedModel {
                gram: outcome.gram,
                iterations: outcome.log.len(),
                converged: outcome.converged && !outcome.line_search_failed,
            })
        }
    }
}

/// Grid candidates for one method; a single entry when nothing is tuned.
fn candidates(plan: &ExperimentPlan, method: MethodSpec) -> Vec<CellParams> {
    let defaults = CellParams {
        lambda: plan.dmoe.nuclear_weight,
        nu: plan.dmoe.deviation_weight,
        gamma0: plan.baseline.margin_target,
    };
    if !plan.tuning {
        return vec![defaults];
    }
    match method {
        MethodSpec::Dmoe => {
            let mut grid = Vec::new();
            for &lambda in &DMOE_LAMBDA_GRID {
                for &nu in &DMOE_NU_GRID {
                    grid.push(CellParams { lambda, nu, ..defaults });
                }
            }
            grid
        }
        MethodSpec::Gnmds => GNMDS_GAMMA_GRID
            .iter()
            .map(|&gamma0| CellParams { gamma0, ..defaults })
            .collect(),
        MethodSpec::Ste | MethodSpec::Tste => vec![defaults],
    }
}

/// Picks cell hyperparameters on a validation fifth of the first repeat's
/// training split. Ties keep the earliest grid entry.
fn tune_cell(
    plan: &ExperimentPlan,
    all: &ComparisonSet,
    method: MethodSpec,
    train_size: usize,
) -> Result<(CellParams, f64), ExperimentError> {
    let grid = candidates(plan, method);
    // Nothing to search, or too little data to hold out a fifth.
    if grid.len() == 1 || train_size < 5 {
        return Ok((grid[0], f64::NAN));
    }
    let run_seed = mix_seed(plan.master_seed, method.name(), train_size, 0);
    let (train_full, _) = split_train_test(all, train_size, sub_seed(run_seed, "split"))?;
    let fit_size = ((train_full.len() * 4) / 5).clamp(1, train_full.len() - 1);
    let (fit, validation) =
        split_train_test(&train_full, fit_size, sub_seed(run_seed, "validation"))?;

    let mut best: Option<(CellParams, f64)> = None;
    for params in grid {
        let model = train(plan, method, params, &fit, run_seed)?;
        let err = generalization_error(&validation, &model.gram)?;
        if best.is_none_or(|(_, b)| err < b) {
            best = Some((params, err));
        }
    }
    Ok(best.expect("grid is nonempty"))
}

fn materialize(plan: &ExperimentPlan) -> Result<ComparisonSet, ExperimentError> {
    match &plan.dataset {
        DatasetSource::Synthetic(spec) => Ok(generate_synthetic(spec).1),
        DatasetSource::File { path, items, index_base } => {
            super::dataset::load_triplet_file(path, *items, *index_base)
        }
    }
}

fn execute_run(
    plan: &ExperimentPlan,
    all: &ComparisonSet,
    method: MethodSpec,
    params: CellParams,
    train_size: usize,
    repeat: usize,
) -> Result<RunRecord, ExperimentError> {
    let run_seed = mix_seed(plan.master_seed, method.name(), train_size, repeat);
    let (train_set, test_set) = split_train_test(all, train_size, sub_seed(run_seed, "split"))?;
    let started = Instant::now();
    let model = train(plan, method, params, &train_set, run_seed)?;
    let wall_millis = started.elapsed().as_millis() as u64;
    let test_error = generalization_error(&test_set, &model.gram)?;
    let train_error = generalization_error(&train_set, &model.gram)?;
    let stats = margin_stats(&train_set, &model.gram, plan.bin_width)?;
    Ok(RunRecord {
        method: method.name().to_string(),
        train_size,
        repeat,
        seed: run_seed,
        test_error,
        train_error,
        margin_mean: stats.mean,
        margin_variance: stats.variance,
        margin_histogram: stats.histogram,
        iterations: model.iterations,
        converged: model.converged,
        wall_millis,
    })
}

/// Runs the whole plan. Tasks are independent over immutable inputs and are
/// distributed over `workers` threads; the report is identical regardless
/// of scheduling because results are keyed by task index and every run is
/// deterministic given its derived seed. Solver failures are folded into
/// flagged rows rather than aborting the plan.
pub fn run_plan(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentReport, ExperimentError> {
    if plan.methods.is_empty() || plan.train_sizes.is_empty() || plan.repeats == 0 {
        return Err(ExperimentError::EmptyPlan);
    }
    let all = materialize(plan)?;

    // Resolve per-cell hyperparameters first (serially; cells are few).
    let mut tuned = Vec::new();
    let mut cells = Vec::new();
    for &method in &plan.methods {
        for &train_size in &plan.train_sizes {
            let (params, validation_error) = tune_cell(plan, &all, method, train_size)?;
            tuned.push(TunedCell {
                method: method.name().to_string(),
                train_size,
                lambda: params.lambda,
                nu: params.nu,
                gamma0: params.gamma0,
                validation_error,
            });
            for repeat in 0..plan.repeats {
                cells.push((method, params, train_size, repeat));
            }
        }
    }

    let results: Vec<Mutex<Option<Result<RunRecord, ExperimentError>>>> =
        cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = workers.max(1).min(cells.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= cells.len() {
                    break;
                }
                let (method, params, train_size, repeat) = cells[idx];
                let outcome = execute_run(plan, &all, method, params, train_size, repeat);
                *results[idx].lock().expect("result slot poisoned") = Some(outcome);
            });
        }
    });

    let mut runs = Vec::with_capacity(cells.len());
    for slot in results {
        let outcome = slot
            .into_inner()
            .expect("result slot poisoned")
            .expect("every task was executed");
        runs.push(outcome?);
    }
    Ok(ExperimentReport::from_runs(runs, tuned))
}
