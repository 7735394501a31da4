//! `ordmargin`: margin-distribution ordinal embedding from the command
//! line: generate comparison datasets, fit a single model, run full
//! benchmark plans, and export plot-ready CSV.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 I/O error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Solver(m) | CliError::Io(m) => m,
        }
    }
}

impl From<ordmargin::experiments::ExperimentError> for CliError {
    fn from(e: ordmargin::experiments::ExperimentError) -> Self {
        use ordmargin::experiments::ExperimentError as E;
        match e {
            E::Io { .. } => CliError::Io(e.to_string()),
            E::Solver(_) => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Shared options: a config file plus point overrides, applied in order
/// (defaults, file, `--set`).
#[derive(Debug, Args)]
struct ConfigArgs {
    /// Flat `section.key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config value, e.g. `--set dmoe.lambda=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Debug, Parser)]
#[command(
    name = "ordmargin",
    version,
    about = "Ordinal embedding with margin-distribution optimization",
    after_help = commands::HELP_FOOTER,
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic Gaussian point cloud and its full triplet file.
    GenSynthetic {
        /// Number of points (overrides synthetic.items).
        #[arg(long)]
        n: Option<usize>,
        /// Ambient dimension (overrides synthetic.dim).
        #[arg(long)]
        dim: Option<usize>,
        /// Coordinate variance (overrides synthetic.scale).
        #[arg(long)]
        scale: Option<f64>,
        /// Seed (overrides synthetic.seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Fit one model to a triplet file and write the Gram matrix,
    /// embedding, convergence log, and a JSON summary.
    Solve {
        /// Triplet file (overrides solve.data).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Item count (overrides solve.items).
        #[arg(long)]
        items: Option<usize>,
        /// Index base of the file (overrides solve.index_base).
        #[arg(long)]
        index_base: Option<usize>,
        /// dmoe | gnmds | ste | tste (overrides solve.method).
        #[arg(long)]
        method: Option<String>,
        /// Embedding dimension (overrides solve.embedding_dim).
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Run a benchmark plan: repeated seeded runs per method and training
    /// size, with per-run CSV, an aggregated table, and a replayable
    /// manifest.
    Bench {
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
        /// Worker threads (default: ORDMARGIN_WORKERS or all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Re-derive plot data (margin histograms, error-vs-size table) from a
    /// bench output directory.
    ExportPlot {
        /// Directory holding runs.csv and margins.csv.
        #[arg(long)]
        runs_dir: PathBuf,
        /// Train size whose margin histograms to export (overrides
        /// export.size; 0 = largest present).
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = config::Config::resolve(cli.config.config.as_deref(), &cli.config.overrides)?;
    match cli.command {
        Command::GenSynthetic { n, dim, scale, seed, output_dir } => {
            if let Some(n) = n {
                config.set("synthetic.items", &n.to_string())?;
            }
            if let Some(dim) = dim {
                config.set("synthetic.dim", &dim.to_string())?;
            }
            if let Some(scale) = scale {
                config.set("synthetic.scale", &scale.to_string())?;
            }
            if let Some(seed) = seed {
                config.set("synthetic.seed", &seed.to_string())?;
            }
            commands::gen_synthetic(&config, &output_dir)
        }
        Command::Solve { data, items, index_base, method, dim, output_dir } => {
            if let Some(data) = data {
                config.set("solve.data", &data.display().to_string())?;
            }
            if let Some(items) = items {
                config.set("solve.items", &items.to_string())?;
            }
            if let Some(base) = index_base {
                config.set("solve.index_base", &base.to_string())?;
            }
            if let Some(method) = method {
                config.set("solve.method", &method)?;
            }
            if let Some(dim) = dim {
                config.set("solve.embedding_dim", &dim.to_string())?;
            }
            commands::solve(&config, &output_dir)
        }
        Command::Bench { output_dir, workers } => {
            let workers = workers
                .or_else(|| {
                    std::env::var("ORDMARGIN_WORKERS")
                        .ok()
                        .and_then(|v| v.parse().ok())
                })
                .unwrap_or_else(|| {
                    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
                });
            commands::bench(&config, &output_dir, workers)
        }
        Command::ExportPlot { runs_dir, size, output_dir } => {
            if let Some(size) = size {
                config.set("export.size", &size.to_string())?;
            }
            commands::export_plot(&config, &runs_dir, &output_dir)
        }
    }
}
