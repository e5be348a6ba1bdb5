use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("domain must have at least one dimension")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid bounds on coordinate {coord}: [{lower}, {upper}]")]
    InvalidBounds { coord: usize, lower: f64, upper: f64 },
    #[error("coordinate {coord} = {value} outside [{lower}, {upper}]")]
    OutOfBounds { coord: usize, value: f64, lower: f64, upper: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("training targets contain a non-finite value at index {index}")]
    NonFiniteTarget { index: usize },
    #[error("need at least {needed} training points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error(
        "Cholesky failed after jitter escalation (lengthscale={lengthscale}, signal_variance={signal_variance}, noise_variance={noise_variance})"
    )]
    Cholesky { lengthscale: f64, signal_variance: f64, noise_variance: f64 },
    #[error("posterior covariance not positive definite after jitter")]
    Sampling,
    #[error("too many query points for a joint draw: {0} > 2000")]
    TooManyQueries(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlpError {
    #[error("need at least 2 training points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("flow fitting needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite input at point {0}")]
    NonFinite(usize),
    #[error("could not bracket the inverse of a 1D transform for target {target}")]
    Inversion { target: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcquisitionError {
    #[error("non-finite acquisition input at proposal {index}")]
    NonFinite { index: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("batch size {batch} exceeds proposal count {proposals}")]
    BatchTooLarge { batch: usize, proposals: usize },
    #[error("acquisition `{0}` needs a surrogate with uncertainty (use the GP)")]
    NeedsUncertainty(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown objective `{0}`")]
    UnknownObjective(String),
    #[error("invalid value for {flag}: {message}")]
    Invalid { flag: &'static str, message: String },
}

/// Errors surfaced by a single optimization run.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DloError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("surrogate fit: {0}")]
    Gp(#[from] GpError),
    #[error("network surrogate: {0}")]
    Mlp(#[from] MlpError),
    #[error("flow: {0}")]
    Flow(#[from] FlowError),
    #[error("acquisition: {0}")]
    Acquisition(#[from] AcquisitionError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("objective failed at call {call}: {message}")]
    Objective { call: usize, message: String },
}

/// Errors from the experiment harness, before or around the runs.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("reading config file {path}: {source}")]
    ConfigFile { path: PathBuf, source: std::io::Error },
    #[error("parsing config file {path}: {source}")]
    ConfigJson { path: PathBuf, source: serde_json::Error },
    #[error("output directory {path} is not writable: {source}")]
    Unwritable { path: PathBuf, source: std::io::Error },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(String),
}
