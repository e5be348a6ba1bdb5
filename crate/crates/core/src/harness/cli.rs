//! Command-line and JSON-file configuration. Precedence: flags, then the
//! `--config` file, then defaults.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde::Deserialize;
use thiserror::Error;

use super::{Algo, ExperimentConfig};
use crate::acquisition::AcquisitionKind;
use crate::error::{ConfigError, HarnessError};
use crate::optimizer::SurrogateKind;
use crate::proposal::InputProposal;

/// Every user-settable knob, unset unless given. Used both as the clap
/// argument struct and as the JSON config schema (keys are the flag names
/// without the leading dashes).
#[derive(Parser, Deserialize, Debug, Default, Clone, PartialEq)]
#[command(name = "dlo", version, about = "Gradient-free global optimization with a flow-regularized surrogate")]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Benchmark id, e.g. ackley10, rastrigin10, rosenbrock10, corrgauss10,
    /// doublegauss10, or ackley-d/rastrigin-d together with --dim
    #[arg(long)]
    pub objective: Option<String>,
    /// Dimension for the -d objectives
    #[arg(long)]
    pub dim: Option<usize>,
    /// Total objective calls per run [default: 12·dim]
    #[arg(long)]
    pub budget: Option<usize>,
    /// Latin-hypercube initial points [default: 2·dim]
    #[arg(long)]
    pub n_init: Option<usize>,
    /// Points evaluated per iteration [default: 1]
    #[arg(long)]
    pub batch: Option<usize>,
    /// Single seed, or the first seed with --replications [default: 0]
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated seed list
    #[arg(long, value_delimiter = ',', conflicts_with = "replications")]
    pub seeds: Option<Vec<u64>>,
    /// Number of consecutive seeds starting at --seed
    #[arg(long)]
    pub replications: Option<usize>,
    /// Algorithm [default: dlo]
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    /// Surrogate model: gp or nn [default: gp]
    #[arg(long)]
    pub surrogate: Option<SurrogateKind>,
    /// Acquisition function: dlo, dlo-greedy, ei, ucb or ts [default: dlo]
    #[arg(long)]
    pub af: Option<AcquisitionKind>,
    /// Weight of the flow log-density penalty [default: 0.01]
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: Option<f64>,
    /// KDE bandwidth prefactor of the flow [default: 1.0]
    #[arg(long)]
    pub bw: Option<f64>,
    /// Final inverse temperature [default: 100]
    #[arg(long)]
    pub beta_max: Option<f64>,
    /// Share of greedy iterations [default: 0.5]
    #[arg(long)]
    pub greedy_fraction: Option<f64>,
    /// Fit the surrogate to raw values (β = 1) throughout
    #[arg(long)]
    pub no_anneal: bool,
    /// Draw input-space proposals from the whole domain instead of the trust region
    #[arg(long)]
    pub no_local_box: bool,
    /// Shape of the input-space proposal region: rect or sphere [default: rect]
    #[arg(long)]
    pub input_proposal: Option<InputProposal>,
    /// Initial trust-region size [default: 1]
    #[arg(long = "R0")]
    #[serde(rename = "R0")]
    pub r0: Option<f64>,
    /// log10 of the trust-region grow/shrink factor [default: log10 2]
    #[arg(long = "dR")]
    #[serde(rename = "dR")]
    pub dr: Option<f64>,
    /// Exploration weight of UCB [default: 1]
    #[arg(long)]
    pub ucb_beta: Option<f64>,
    /// Replications run in parallel [default: 1]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory [default: results]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of these settings
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Record elapsed milliseconds in the wall_ms trace column (makes reruns
    /// differ byte-for-byte)
    #[arg(long)]
    pub wall_clock: bool,
}

impl Settings {
    /// `self` where set, `fallback` otherwise. The seed options are taken as
    /// a group so that e.g. `--seed` on the command line fully replaces a
    /// `seeds` list from the file.
    pub fn or(self, fallback: Settings) -> Settings {
        let own_seeds = self.seed.is_some() || self.seeds.is_some() || self.replications.is_some();
        let (seed, seeds, replications) = if own_seeds {
            (self.seed, self.seeds, self.replications)
        } else {
            (fallback.seed, fallback.seeds, fallback.replications)
        };
        Settings {
            objective: self.objective.or(fallback.objective),
            dim: self.dim.or(fallback.dim),
            budget: self.budget.or(fallback.budget),
            n_init: self.n_init.or(fallback.n_init),
            batch: self.batch.or(fallback.batch),
            seed,
            seeds,
            replications,
            algo: self.algo.or(fallback.algo),
            surrogate: self.surrogate.or(fallback.surrogate),
            af: self.af.or(fallback.af),
            x: self.x.or(fallback.x),
            bw: self.bw.or(fallback.bw),
            beta_max: self.beta_max.or(fallback.beta_max),
            greedy_fraction: self.greedy_fraction.or(fallback.greedy_fraction),
            no_anneal: self.no_anneal || fallback.no_anneal,
            no_local_box: self.no_local_box || fallback.no_local_box,
            input_proposal: self.input_proposal.or(fallback.input_proposal),
            r0: self.r0.or(fallback.r0),
            dr: self.dr.or(fallback.dr),
            ucb_beta: self.ucb_beta.or(fallback.ucb_beta),
            jobs: self.jobs.or(fallback.jobs),
            out: self.out.or(fallback.out),
            config: self.config,
            wall_clock: self.wall_clock || fallback.wall_clock,
        }
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Settings, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::ConfigFile { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| HarnessError::ConfigJson { path: path.into(), source })
    }

    /// Applies defaults and validates.
    pub fn resolve(self) -> Result<ExperimentConfig, ConfigError> {
        let objective = self
            .objective
            .ok_or(ConfigError::Invalid { flag: "--objective", message: "required".into() })?;
        let mut cfg = ExperimentConfig::new(&objective, self.dim)?;
        let base_seed = self.seed.unwrap_or(0);
        cfg.seeds = match (self.seeds, self.replications) {
            (Some(list), _) => list,
            (None, Some(k)) => (0..k as u64).map(|i| base_seed + i).collect(),
            (None, None) => vec![base_seed],
        };
        let o = &mut cfg.optimizer;
        if let Some(v) = self.budget {
            o.budget = v;
        }
        if let Some(v) = self.n_init {
            o.n_init = v;
        }
        if let Some(v) = self.batch {
            o.batch = v;
        }
        if let Some(v) = self.surrogate {
            o.surrogate = v;
        }
        if let Some(v) = self.af {
            o.acquisition.kind = v;
        }
        if let Some(v) = self.x {
            o.acquisition.exploration = v;
        }
        if let Some(v) = self.ucb_beta {
            o.acquisition.ucb_beta = v;
        }
        if let Some(v) = self.bw {
            o.flow.bw = v;
        }
        if let Some(v) = self.beta_max {
            o.beta_max = v;
        }
        if let Some(v) = self.greedy_fraction {
            o.greedy_fraction = v;
        }
        if let Some(v) = self.input_proposal {
            o.proposals.shape = v;
        }
        if let Some(v) = self.r0 {
            o.r0 = v;
        }
        if let Some(v) = self.dr {
            o.dr = v;
        }
        o.anneal = !self.no_anneal;
        o.proposals.local_box = !self.no_local_box;
        cfg.algo = self.algo.unwrap_or_default();
        cfg.jobs = self.jobs.unwrap_or(1);
        if let Some(out) = self.out {
            cfg.out = out;
        }
        cfg.wall_clock = self.wall_clock;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

impl CliError {
    /// 0 for `--help`/`--version`, 2 for usage and configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Harness(_) => 2,
        }
    }
}

/// Parses `argv` (including the program name), merges the optional JSON
/// config file underneath and resolves defaults.
pub fn parse_cli<I, T>(argv: I) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Settings::try_parse_from(argv)?;
    let merged = match &cli.config {
        Some(path) => {
            let file = Settings::from_json_file(path)?;
            cli.or(file)
        }
        None => cli,
    };
    Ok(merged.resolve().map_err(HarnessError::from)?)
}
