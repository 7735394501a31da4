//! Flat `section.key = value` configuration with `--set` overrides.
//!
//! Every key is declared in the registry below with its default; unknown
//! keys are rejected up front so typos cannot silently fall back to
//! defaults. The resolved map is echoed verbatim into the run manifest,
//! which is itself a loadable config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ordmargin::baselines::LineSearch;
use ordmargin::dmoe::DmoeConfig;
use ordmargin::experiments::{
    BaselineTemplate, DatasetSource, ExperimentPlan, MethodSpec, SyntheticSpec,
};
use ordmargin::kernels::CgSettings;

use crate::CliError;

/// `(key, default, help)` for every recognized config key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("synthetic.items", "100", "number of synthetic points"),
    ("synthetic.dim", "10", "ambient dimension of the synthetic cloud"),
    ("synthetic.scale", "0.05", "coordinate variance of the synthetic cloud"),
    ("synthetic.seed", "7", "seed for the synthetic cloud"),
    ("plan.dataset", "synthetic", "benchmark dataset: synthetic | file"),
    ("plan.file", "", "triplet file path when plan.dataset = file"),
    ("plan.items", "400", "item count of the triplet file"),
    ("plan.index_base", "0", "index base of the triplet file"),
    ("plan.train_sizes", "200,1000,10000", "comma-separated training sizes"),
    ("plan.methods", "gnmds,ste,tste,dmoe", "comma-separated methods"),
    ("plan.repeats", "10", "seeded repeats per (method, size) cell"),
    ("plan.embedding_dim", "10", "target embedding dimension p"),
    ("plan.master_seed", "2024", "master seed for split/init derivation"),
    ("plan.tuning", "true", "grid-search regularization per cell"),
    ("plan.bin_width", "0.05", "margin histogram bin width"),
    ("dmoe.gamma0", "1", "target margin mean"),
    ("dmoe.nu", "1", "deviation weight above the target"),
    ("dmoe.lambda", "0.01", "nuclear-norm weight"),
    ("dmoe.mu0", "1", "initial penalty"),
    ("dmoe.rho", "1.05", "penalty growth factor (> 1)"),
    ("dmoe.mu_max", "1e8", "penalty cap"),
    ("dmoe.objective_tolerance", "0.001", "objective-change stopping threshold"),
    ("dmoe.residual_tolerance", "0.001", "primal residual requirement at convergence"),
    ("dmoe.max_iterations", "500", "outer iteration cap"),
    ("dmoe.cg_tolerance", "1e-8", "relative residual of the inner CG solve"),
    ("dmoe.cg_max_iterations", "0", "CG iteration cap (0 = 10·n²)"),
    ("baseline.gamma0", "1", "GNMDS hinge target"),
    ("baseline.alpha", "0", "Student-t dof for TSTE (0 = max(p−1, 1))"),
    ("baseline.max_iterations", "1000", "gradient-descent iteration cap"),
    ("baseline.gradient_tolerance", "1e-5", "projected-gradient stopping norm"),
    ("baseline.shrink", "0.5", "line-search backtracking factor"),
    ("baseline.sufficient_decrease", "1e-4", "Armijo constant"),
    ("baseline.initial_step", "1", "line-search starting step"),
    ("solve.method", "dmoe", "method for single solves: dmoe | gnmds | ste | tste"),
    ("solve.data", "", "triplet file for single solves"),
    ("solve.items", "0", "item count of the solve dataset"),
    ("solve.index_base", "0", "index base of the solve dataset"),
    ("solve.embedding_dim", "2", "embedding dimension for single solves"),
    ("solve.bin_width", "0.05", "margin histogram bin width for the summary"),
    ("solve.seed", "1", "baseline initialization seed for single solves"),
    ("export.size", "0", "train size whose margins to export (0 = largest present)"),
];

#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn defaults() -> Self {
        let values = KEYS
            .iter()
            .map(|(k, d, _)| (k.to_string(), d.to_string()))
            .collect();
        Self { values }
    }

    /// Defaults, then the optional file, then `--set` overrides.
    pub fn resolve(file: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut config = Self::defaults();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Config(format!(
                        "{}:{}: expected `section.key = value`",
                        path.display(),
                        idx + 1
                    ))
                })?;
                config.set(key.trim(), value.trim())?;
            }
        }
        for entry in overrides {
            let (key, value) = entry.split_once('=').ok_or_else(|| {
                CliError::Config(format!("--set {entry}: expected key=value"))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !self.values.contains_key(key) {
            return Err(CliError::Config(format!("unknown config key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("key `{key}` missing from registry"))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, CliError> {
        self.get(key)
            .parse()
            .map_err(|_| CliError::Config(format!("{key}: expected an integer, got `{}`", self.get(key))))
    }

    pub fn get_u64(&self, key: &str) -> Result<u64, CliError> {
        self.get(key)
            .parse()
            .map_err(|_| CliError::Config(format!("{key}: expected an integer, got `{}`", self.get(key))))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, CliError> {
        self.get(key)
            .parse()
            .map_err(|_| CliError::Config(format!("{key}: expected a number, got `{}`", self.get(key))))
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(CliError::Config(format!("{key}: expected true/false, got `{other}`"))),
        }
    }

    /// The resolved configuration as a loadable manifest body (sorted keys).
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            writeln!(out, "{k} = {v}").expect("string write");
        }
        out
    }

    pub fn dmoe_config(&self, target_rank: usize) -> Result<DmoeConfig, CliError> {
        let cg_cap = self.get_usize("dmoe.cg_max_iterations")?;
        Ok(DmoeConfig {
            margin_target: self.get_f64("dmoe.gamma0")?,
            deviation_weight: self.get_f64("dmoe.nu")?,
            nuclear_weight: self.get_f64("dmoe.lambda")?,
            penalty_start: self.get_f64("dmoe.mu0")?,
            penalty_growth: self.get_f64("dmoe.rho")?,
            penalty_cap: self.get_f64("dmoe.mu_max")?,
            objective_tolerance: self.get_f64("dmoe.objective_tolerance")?,
            residual_tolerance: self.get_f64("dmoe.residual_tolerance")?,
            max_outer_iterations: self.get_usize("dmoe.max_iterations")?,
            target_rank,
            cg: CgSettings {
                relative_tolerance: self.get_f64("dmoe.cg_tolerance")?,
                max_iterations: match cg_cap {
                    0 => None,
                    cap => Some(cap),
                },
                warm_start: true,
            },
        })
    }

    pub fn baseline_template(&self) -> Result<BaselineTemplate, CliError> {
        let alpha = self.get_f64("baseline.alpha")?;
        Ok(BaselineTemplate {
            margin_target: self.get_f64("baseline.gamma0")?,
            student_dof: if alpha > 0.0 { Some(alpha) } else { None },
            max_iterations: self.get_usize("baseline.max_iterations")?,
            gradient_tolerance: self.get_f64("baseline.gradient_tolerance")?,
            line_search: LineSearch {
                shrink: self.get_f64("baseline.shrink")?,
                sufficient_decrease: self.get_f64("baseline.sufficient_decrease")?,
                initial_step: self.get_f64("baseline.initial_step")?,
            },
        })
    }

    pub fn synthetic_spec(&self) -> Result<SyntheticSpec, CliError> {
        Ok(SyntheticSpec {
            items: self.get_usize("synthetic.items")?,
            ambient_dim: self.get_usize("synthetic.dim")?,
            covariance_scale: self.get_f64("synthetic.scale")?,
            seed: self.get_u64("synthetic.seed")?,
        })
    }

    pub fn plan(&self) -> Result<ExperimentPlan, CliError> {
        let dataset = match self.get("plan.dataset") {
            "synthetic" => DatasetSource::Synthetic(self.synthetic_spec()?),
            "file" => {
                let path = self.get("plan.file");
                if path.is_empty() {
                    return Err(CliError::Config(
                        "plan.dataset = file requires plan.file".into(),
                    ));
                }
                DatasetSource::File {
                    path: PathBuf::from(path),
                    items: self.get_usize("plan.items")?,
                    index_base: self.get_usize("plan.index_base")?,
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "plan.dataset: expected synthetic|file, got `{other}`"
                )))
            }
        };
        let train_sizes = self
            .get("plan.train_sizes")
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    CliError::Config(format!("plan.train_sizes: bad size `{}`", s.trim()))
                })
            })
            .collect::<Result<Vec<usize>, _>>()?;
        let methods = self
            .get("plan.methods")
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                MethodSpec::parse(s).ok_or_else(|| {
                    CliError::Config(format!("plan.methods: unknown method `{}`", s.trim()))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let embedding_dim = self.get_usize("plan.embedding_dim")?;
        Ok(ExperimentPlan {
            dataset,
            train_sizes,
            methods,
            repeats: self.get_usize("plan.repeats")?,
            embedding_dim,
            master_seed: self.get_u64("plan.master_seed")?,
            tuning: self.get_bool("plan.tuning")?,
            bin_width: self.get_f64("plan.bin_width")?,
            dmoe: self.dmoe_config(embedding_dim)?,
            baseline: self.baseline_template()?,
        })
    }
}
