//! Per-run records and their aggregation into the published table shape,
//! plus the CSV writers. All formatting is deterministic so a replayed
//! plan reproduces the aggregate byte for byte.

/// One training run. Everything needed to recompute the aggregate lives in
/// these rows; the aggregate holds no extra state.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: String,
    pub train_size: usize,
    pub repeat: usize,
    pub seed: u64,
    pub test_error: f64,
    pub train_error: f64,
    pub margin_mean: f64,
    pub margin_variance: f64,
    pub margin_histogram: Vec<(f64, usize)>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_millis: u64,
}

/// Hyperparameters resolved for one (method, size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedCell {
    pub method: String,
    pub train_size: usize,
    pub lambda: f64,
    pub nu: f64,
    pub gamma0: f64,
    /// Validation error of the winning candidate; NaN when nothing was
    /// searched.
    pub validation_error: f64,
}

/// Test-error statistics of one (method, size) cell over its repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub method: String,
    pub train_size: usize,
    pub min: f64,
    /// Lower-middle order statistic for an even repeat count.
    pub median: f64,
    pub max: f64,
    /// Population standard deviation over the repeats.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub runs: Vec<RunRecord>,
    pub cells: Vec<CellStats>,
    pub tuned: Vec<TunedCell>,
}

impl ExperimentReport {
    /// Aggregates the rows; cell order follows first appearance of
    /// (method, size) in the runs.
    pub fn from_runs(runs: Vec<RunRecord>, tuned: Vec<TunedCell>) -> Self {
        let mut cells: Vec<CellStats> = Vec::new();
        let mut keys: Vec<(String, usize)> = Vec::new();
        for run in &runs {
            let key = (run.method.clone(), run.train_size);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        for (method, train_size) in keys {
            let errors: Vec<f64> = runs
                .iter()
                .filter(|r| r.method == method && r.train_size == train_size)
                .map(|r| r.test_error)
                .collect();
            cells.push(cell_stats(method, train_size, &errors));
        }
        Self { runs, cells, tuned }
    }

    pub fn cell(&self, method: &str, train_size: usize) -> Option<&CellStats> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.train_size == train_size)
    }
}

fn cell_stats(method: String, train_size: usize, errors: &[f64]) -> CellStats {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    // Even counts take the lower-middle order statistic.
    let median = sorted[(sorted.len() - 1) / 2];
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    let var = sorted.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / sorted.len() as f64;
    CellStats { method, train_size, min, median, max, std: var.sqrt() }
}

/// `runs.csv`: one row per training run.
pub fn runs_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "method,train_size,repeat,seed,test_error,train_error,margin_mean,margin_variance,iterations,converged,wall_millis\n",
    );
    for r in &report.runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.train_size,
            r.repeat,
            r.seed,
            r.test_error,
            r.train_error,
            r.margin_mean,
            r.margin_variance,
            r.iterations,
            r.converged,
            r.wall_millis
        ));
    }
    out
}

/// `margins.csv`: the training-margin histogram of every run in long form.
pub fn margins_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("method,train_size,repeat,bin_lower,count\n");
    for r in &report.runs {
        for &(edge, count) in &r.margin_histogram {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.method, r.train_size, r.repeat, edge, count
            ));
        }
    }
    out
}

/// `aggregate.csv`: rows are methods, columns are min/median/max/std per
/// train size (the published table shape). Excludes wall-clock so replays
/// are byte-identical.
pub fn aggregate_csv(report: &ExperimentReport) -> String {
    let mut methods: Vec<String> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for c in &report.cells {
        if !methods.contains(&c.method) {
            methods.push(c.method.clone());
        }
        if !sizes.contains(&c.train_size) {
            sizes.push(c.train_size);
        }
    }
    sizes.sort_unstable();

    let mut out = String::from("method");
    for s in &sizes {
        out.push_str(&format!(",min_{s},median_{s},max_{s},std_{s}"));
    }
    out.push('\n');
    for m in &methods {
        out.push_str(m);
        for &s in &sizes {
            match report.cell(m, s) {
                Some(c) => out.push_str(&format!(",{},{},{},{}", c.min, c.median, c.max, c.std)),
                None => out.push_str(",,,,"),
            }
        }
        out.push('\n');
    }
    out
}
