//! The four subcommands. All file output goes through `write_file` so
//! every artifact lands atomically under the chosen output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use ordmargin::baselines::{solve_baseline, BaselineConfig, BaselineMethod, BaselineOutcome};
use ordmargin::dmoe::{DmoeSolver, IterationTrace};
use ordmargin::experiments::{
    aggregate_csv, generate_synthetic, load_triplet_file, margins_csv, run_plan, runs_csv,
    MethodSpec,
};
use ordmargin::model::{
    generalization_error, gram_to_embedding, margin_stats, ComparisonSet, Gram,
};

use crate::config::Config;
use crate::CliError;

pub const HELP_FOOTER: &str = "\
Output schemas (all CSV, one header row):
  points.csv       one row per item, ambient coordinates
  triplets.txt     `i,j,k` records: i is closer to j than to k
  gram.csv         learned Gram matrix, row per item
  embedding.csv    one row per item, `dim` coordinates
  convergence.csv  dmoe: iteration,objective,res_e1,res_e2,res_g1,res_g2,mu
                   baselines: iteration,loss,step,projected_gradient_norm
  summary.json     method, errors, margin stats, iteration/convergence flags
  runs.csv         method,train_size,repeat,seed,test_error,train_error,
                   margin_mean,margin_variance,iterations,converged,wall_millis
  margins.csv      method,train_size,repeat,bin_lower,count
  aggregate.csv    method, then min/median/max/std per train size
  manifest.txt     resolved config; `bench --config manifest.txt` replays a run
  error_vs_size.csv / histogram_<method>.csv   plot-ready exports

Config file: flat `section.key = value` lines, `#` comments. Keys and
defaults are listed in the README; unknown keys are rejected.
ORDMARGIN_WORKERS sets the default worker count for bench.";

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

fn matrix_csv(m: &ordmargin::nalgebra::DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{}", m[(r, c)]).expect("string write");
        }
        out.push('\n');
    }
    out
}

// ───────────────────────── gen-synthetic ─────────────────────────

pub fn gen_synthetic(config: &Config, output_dir: &Path) -> Result<(), CliError> {
    let spec = config.synthetic_spec()?;
    let (points, set) = generate_synthetic(&spec);
    ensure_dir(output_dir)?;

    // Points as one row per item.
    write_file(output_dir, "points.csv", &matrix_csv(&points.transpose()))?;

    let mut triplets = String::new();
    writeln!(
        triplets,
        "# synthetic cloud: items = {}, dim = {}, scale = {}, seed = {}",
        spec.items, spec.ambient_dim, spec.covariance_scale, spec.seed
    )
    .expect("string write");
    triplets.push_str("i,j,k\n");
    for (c, _) in set.iter() {
        let (first, second) = c.pairs();
        writeln!(triplets, "{},{},{}", first.0, first.1, second.1).expect("string write");
    }
    write_file(output_dir, "triplets.txt", &triplets)?;

    println!(
        "wrote {} points and {} triplets to {}",
        spec.items,
        set.len(),
        output_dir.display()
    );
    Ok(())
}

// ───────────────────────── solve ─────────────────────────

#[derive(Serialize)]
struct SolveSummary {
    method: String,
    items: usize,
    constraints: usize,
    embedding_dim: usize,
    train_error: f64,
    margin_mean: f64,
    margin_variance: f64,
    iterations: usize,
    converged: bool,
    wall_millis: u64,
}

fn dmoe_trace_csv(trace: &[IterationTrace]) -> String {
    let mut out = String::from("iteration,objective,res_e1,res_e2,res_g1,res_g2,mu\n");
    for (i, t) in trace.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            i + 1,
            t.objective,
            t.residuals[0],
            t.residuals[1],
            t.residuals[2],
            t.residuals[3],
            t.mu
        )
        .expect("string write");
    }
    out
}

fn baseline_trace_csv(outcome: &BaselineOutcome) -> String {
    let mut out = String::from("iteration,loss,step,projected_gradient_norm\n");
    for entry in &outcome.log {
        writeln!(
            out,
            "{},{},{},{}",
            entry.iteration + 1,
            entry.loss,
            entry.step,
            entry.projected_gradient_norm
        )
        .expect("string write");
    }
    out
}

fn load_solve_set(config: &Config) -> Result<ComparisonSet, CliError> {
    let data = config.get("solve.data");
    if data.is_empty() {
        return Err(CliError::Config("solve requires --data (or solve.data)".into()));
    }
    let items = config.get_usize("solve.items")?;
    if items == 0 {
        return Err(CliError::Config("solve requires --items (or solve.items)".into()));
    }
    let base = config.get_usize("solve.index_base")?;
    Ok(load_triplet_file(Path::new(data), items, base)?)
}

pub fn solve(config: &Config, output_dir: &Path) -> Result<(), CliError> {
    let set = load_solve_set(config)?;
    let dim = config.get_usize("solve.embedding_dim")?;
    let method = config.get("solve.method").to_string();
    ensure_dir(output_dir)?;
    let started = Instant::now();

    let (gram, iterations, converged, trace_csv): (Gram, usize, bool, String) = match method
        .as_str()
    {
        "dmoe" => {
            let solver = DmoeSolver::new(&set, config.dmoe_config(dim)?);
            match solver.solve() {
                Ok(solution) => {
                    let csv = dmoe_trace_csv(&solution.state.trace);
                    (
                        solution.gram,
                        solution.state.iterations,
                        solution.state.converged,
                        csv,
                    )
                }
                Err(failure) => {
                    // Keep the partial log next to the error.
                    write_file(output_dir, "convergence.csv", &dmoe_trace_csv(&failure.state.trace))?;
                    return Err(CliError::Solver(failure.error.to_string()));
                }
            }
        }
        name => {
            let spec = MethodSpec::parse(name)
                .ok_or_else(|| CliError::Config(format!("unknown method `{name}`")))?;
            let base = match spec {
                MethodSpec::Gnmds => BaselineMethod::Gnmds,
                MethodSpec::Ste => BaselineMethod::Ste,
                MethodSpec::Tste => BaselineMethod::Tste,
                MethodSpec::Dmoe => unreachable!("dmoe handled above"),
            };
            let template = config.baseline_template()?;
            let baseline = BaselineConfig {
                method: base,
                target_rank: dim,
                margin_target: template.margin_target,
                student_dof: template.student_dof,
                max_iterations: template.max_iterations,
                gradient_tolerance: template.gradient_tolerance,
                line_search: template.line_search,
                seed: config.get_u64("solve.seed")?,
            };
            let outcome =
                solve_baseline(&set, &baseline).map_err(|e| CliError::Solver(e.to_string()))?;
            let csv = baseline_trace_csv(&outcome);
            let iterations = outcome.log.len();
            let converged = outcome.converged && !outcome.line_search_failed;
            (outcome.gram, iterations, converged, csv)
        }
    };
    let wall_millis = started.elapsed().as_millis() as u64;

    write_file(output_dir, "gram.csv", &matrix_csv(gram.matrix()))?;
    let embedding = gram_to_embedding(&gram, dim);
    write_file(output_dir, "embedding.csv", &matrix_csv(&embedding.transpose()))?;
    write_file(output_dir, "convergence.csv", &trace_csv)?;

    let stats = margin_stats(&set, &gram, config.get_f64("solve.bin_width")?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let summary = SolveSummary {
        method,
        items: set.size().items(),
        constraints: set.len(),
        embedding_dim: dim,
        train_error: generalization_error(&set, &gram)
            .map_err(|e| CliError::Config(e.to_string()))?,
        margin_mean: stats.mean,
        margin_variance: stats.variance,
        iterations,
        converged,
        wall_millis,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Io(format!("encoding summary: {e}")))?;
    write_file(output_dir, "summary.json", &json)?;

    println!(
        "{}: train error {:.4}, {} iterations, converged = {}",
        summary.method, summary.train_error, summary.iterations, summary.converged
    );
    Ok(())
}

// ───────────────────────── bench ─────────────────────────

pub fn bench(config: &Config, output_dir: &Path, workers: usize) -> Result<(), CliError> {
    let plan = config.plan()?;
    ensure_dir(output_dir)?;
    let started = Instant::now();
    let report = run_plan(&plan, workers)?;

    write_file(output_dir, "runs.csv", &runs_csv(&report))?;
    write_file(output_dir, "margins.csv", &margins_csv(&report))?;
    write_file(output_dir, "aggregate.csv", &aggregate_csv(&report))?;

    let mut manifest = String::new();
    writeln!(manifest, "# ordmargin {} bench manifest", env!("CARGO_PKG_VERSION"))
        .expect("string write");
    writeln!(manifest, "# replay with: ordmargin bench --config manifest.txt")
        .expect("string write");
    for cell in &report.tuned {
        writeln!(
            manifest,
            "# tuned {}@{}: lambda = {}, nu = {}, gamma0 = {}, validation error = {}",
            cell.method, cell.train_size, cell.lambda, cell.nu, cell.gamma0, cell.validation_error
        )
        .expect("string write");
    }
    for run in report.runs.iter().filter(|r| !r.converged) {
        writeln!(
            manifest,
            "# non-converged: {}@{} repeat {} (seed {})",
            run.method, run.train_size, run.repeat, run.seed
        )
        .expect("string write");
    }
    manifest.push_str(&config.manifest());
    write_file(output_dir, "manifest.txt", &manifest)?;

    println!(
        "bench: {} runs across {} cells in {:.1?}; outputs in {}",
        report.runs.len(),
        report.cells.len(),
        started.elapsed(),
        output_dir.display()
    );
    Ok(())
}

// ───────────────────────── export-plot ─────────────────────────

struct ParsedRun {
    method: String,
    train_size: usize,
    test_error: f64,
}

fn parse_runs(path: &Path) -> Result<Vec<ParsedRun>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(CliError::Io(format!(
                "{}:{}: expected 11 columns",
                path.display(),
                idx + 1
            )));
        }
        rows.push(ParsedRun {
            method: fields[0].to_string(),
            train_size: fields[1]
                .parse()
                .map_err(|_| CliError::Io(format!("{}:{}: bad size", path.display(), idx + 1)))?,
            test_error: fields[4]
                .parse()
                .map_err(|_| CliError::Io(format!("{}:{}: bad error", path.display(), idx + 1)))?,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Io(format!("{}: no runs to export", path.display())));
    }
    Ok(rows)
}

pub fn export_plot(config: &Config, runs_dir: &Path, output_dir: &Path) -> Result<(), CliError> {
    let runs = parse_runs(&runs_dir.join("runs.csv"))?;
    let margins_path = runs_dir.join("margins.csv");
    let margins_text = std::fs::read_to_string(&margins_path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", margins_path.display())))?;

    ensure_dir(output_dir)?;

    // Error-vs-size table from the per-run rows.
    let mut methods: Vec<String> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for r in &runs {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
        if !sizes.contains(&r.train_size) {
            sizes.push(r.train_size);
        }
    }
    sizes.sort_unstable();
    let mut table = String::from("method,size,min,median,max\n");
    for method in &methods {
        for &size in &sizes {
            let mut errors: Vec<f64> = runs
                .iter()
                .filter(|r| &r.method == method && r.train_size == size)
                .map(|r| r.test_error)
                .collect();
            if errors.is_empty() {
                continue;
            }
            errors.sort_by(f64::total_cmp);
            let median = errors[(errors.len() - 1) / 2];
            writeln!(
                table,
                "{method},{size},{},{median},{}",
                errors[0],
                errors[errors.len() - 1]
            )
            .expect("string write");
        }
    }
    write_file(output_dir, "error_vs_size.csv", &table)?;

    // Margin histograms for one representative run (repeat 0) per method at
    // the requested size, so counts sum to the training size.
    let requested = config.get_usize("export.size")?;
    let size = if requested == 0 {
        *sizes.last().expect("nonempty runs")
    } else {
        requested
    };
    for method in &methods {
        let mut hist = String::from("bin_lower,count\n");
        let mut found = false;
        for line in margins_text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                continue;
            }
            if fields[0] == method && fields[1] == size.to_string() && fields[2] == "0" {
                writeln!(hist, "{},{}", fields[3], fields[4]).expect("string write");
                found = true;
            }
        }
        if !found {
            return Err(CliError::Io(format!(
                "margins.csv has no rows for {method} at size {size} repeat 0"
            )));
        }
        write_file(output_dir, &format!("histogram_{method}.csv"), &hist)?;
    }

    println!(
        "exported error table over {:?} and {} histograms at size {size} to {}",
        sizes,
        methods.len(),
        output_dir.display()
    );
    Ok(())
}
