//! Replicated experiments: resolve a configuration, run one optimization
//! per seed (optionally on a worker pool) and persist per-run traces plus a
//! cross-seed summary as CSV.

mod cli;
mod output;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cli::{parse_cli, CliError, Settings};
pub use output::{read_best_so_far, summary_rows, SummaryRow, SUMMARY_HEADER, TRACE_FIXED_COLUMNS};

use crate::error::{ConfigError, HarnessError};
use crate::objectives::{by_id, Objective};
use crate::optimizer::{random_search, run, OptimizationResult, OptimizerConfig, RunStatus};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    #[default]
    Dlo,
    Random,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Dlo => "dlo",
            Algo::Random => "random",
        }
    }
}

/// A fully resolved experiment: one objective, one algorithm, several seeds.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub objective: String,
    pub dim: usize,
    pub algo: Algo,
    pub seeds: Vec<u64>,
    /// Shared by all replications; `seed` is replaced per run.
    pub optimizer: OptimizerConfig,
    pub jobs: usize,
    pub out: PathBuf,
    /// Record elapsed milliseconds in the `wall_ms` column. Off by default so
    /// that reruns produce byte-identical traces.
    pub wall_clock: bool,
}

impl ExperimentConfig {
    /// Defaults for `objective` (budget `12d`, `2d` initial points, seed 0).
    pub fn new(objective: &str, dim: Option<usize>) -> Result<Self, ConfigError> {
        let obj = by_id(objective, dim)?;
        Ok(Self {
            objective: objective.to_string(),
            dim: obj.dim(),
            algo: Algo::Dlo,
            seeds: vec![0],
            optimizer: OptimizerConfig::for_dim(obj.dim()),
            jobs: 1,
            out: PathBuf::from("results"),
            wall_clock: false,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid { flag: "--seeds", message: "need at least one seed".into() });
        }
        if self.jobs == 0 {
            return Err(ConfigError::Invalid { flag: "--jobs", message: "must be >= 1".into() });
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::Invalid { flag: "--seeds", message: "seeds must be distinct".into() });
        }
        self.optimizer.validate()
    }

    pub fn objective(&self) -> Result<Objective, ConfigError> {
        by_id(&self.objective, Some(self.dim))
    }

    pub fn trace_path(&self, seed: u64) -> PathBuf {
        self.out.join(format!("trace_{seed}.csv"))
    }

    pub fn summary_path(&self) -> PathBuf {
        self.out.join("summary.csv")
    }
}

/// Runs one replication.
pub fn run_single(objective: &Objective, config: &ExperimentConfig, seed: u64) -> OptimizationResult {
    match config.algo {
        Algo::Random => random_search(objective, config.optimizer.budget, config.optimizer.n_init, seed),
        Algo::Dlo => {
            let opt = OptimizerConfig { seed, ..config.optimizer.clone() };
            run(objective, opt).unwrap_or_else(|e| OptimizationResult::aborted(objective.dim(), e.to_string()))
        }
    }
}

pub struct ExperimentReport {
    /// `(seed, result)` in the order of `config.seeds`.
    pub runs: Vec<(u64, OptimizationResult)>,
    pub trace_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
}

impl ExperimentReport {
    pub fn all_complete(&self) -> bool {
        self.runs.iter().all(|(_, r)| r.is_complete())
    }

    pub fn final_values(&self) -> Vec<f64> {
        self.runs.iter().map(|(_, r)| r.best_value).collect()
    }
}

fn check_writable(dir: &Path) -> Result<(), HarnessError> {
    let unwritable = |source| HarnessError::Unwritable { path: dir.to_path_buf(), source };
    std::fs::create_dir_all(dir).map_err(unwritable)?;
    tempfile::NamedTempFile::new_in(dir).map(drop).map_err(unwritable)
}

/// Runs every replication and writes `trace_<seed>.csv` for each plus
/// `summary.csv`. Failed runs are kept (with a partial trace) and flagged in
/// the summary; only configuration and I/O problems return an error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    let objective = config.objective()?;
    check_writable(&config.out)?;

    let work = |seed: u64| -> Result<(u64, OptimizationResult), HarnessError> {
        let result = run_single(&objective, config, seed);
        output::write_trace(&config.trace_path(seed), config, seed, &result)?;
        Ok((seed, result))
    };
    let runs: Vec<(u64, OptimizationResult)> = if config.jobs == 1 {
        config.seeds.iter().map(|&s| work(s)).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        pool.install(|| config.seeds.par_iter().map(|&s| work(s)).collect::<Result<_, _>>())?
    };

    let summary_path = config.summary_path();
    output::write_summary(&summary_path, config, &runs)?;
    Ok(ExperimentReport {
        trace_paths: config.seeds.iter().map(|&s| config.trace_path(s)).collect(),
        runs,
        summary_path,
    })
}

/// One line per run for the terminal.
pub fn describe_run(seed: u64, result: &OptimizationResult) -> String {
    match &result.status {
        RunStatus::Complete => format!("seed {seed}: best {} after {} calls", result.best_value, result.trace.len()),
        RunStatus::Aborted(msg) => format!("seed {seed}: aborted after {} calls: {msg}", result.trace.len()),
    }
}
