//! The outer optimization loop.
//!
//! After a Latin-hypercube initial design, every iteration fits the flow to
//! all evaluated points, fits the surrogate to the annealed targets
//! `β_i · f`, draws proposals around the incumbent, scores them with the
//! configured acquisition function and evaluates the best batch.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acquisition::{self, AcquisitionConfig, AcquisitionKind};
use crate::error::{AcquisitionError, ConfigError, DloError};
use crate::flow::{Flow, FlowConfig};
use crate::gp::{GpFitOptions, GpModel};
use crate::history::EvaluationLog;
use crate::mlp::{MlpConfig, MlpModel};
use crate::objectives::Objective;
use crate::proposal::{self, ProposalConfig, TrustState, DEFAULT_DR};
use crate::rng::{Rng as StreamRng, RngState, Stream};
use crate::sampling::{latin_hypercube, uniform_cube};
use crate::schedule::{AnnealSchedule, Mode, DEFAULT_BETA_MAX};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurrogateKind {
    #[default]
    Gp,
    Nn,
}

impl FromStr for SurrogateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gp" => Ok(Self::Gp),
            "nn" => Ok(Self::Nn),
            _ => Err(format!("unknown surrogate `{s}` (expected gp or nn)")),
        }
    }
}

impl fmt::Display for SurrogateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gp => "gp",
            Self::Nn => "nn",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub budget: usize,
    pub n_init: usize,
    pub batch: usize,
    pub surrogate: SurrogateKind,
    pub acquisition: AcquisitionConfig,
    pub beta_max: f64,
    pub greedy_fraction: f64,
    pub anneal: bool,
    pub r0: f64,
    pub dr: f64,
    pub proposals: ProposalConfig,
    pub flow: FlowConfig,
    pub gp: GpFitOptions,
    pub mlp: MlpConfig,
    pub seed: u64,
}

impl OptimizerConfig {
    /// Defaults for a `dim`-dimensional problem: `2d` initial points and a
    /// budget of `2d + 10d`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            budget: 12 * dim,
            n_init: 2 * dim,
            batch: 1,
            surrogate: SurrogateKind::Gp,
            acquisition: AcquisitionConfig::default(),
            beta_max: DEFAULT_BETA_MAX,
            greedy_fraction: 0.5,
            anneal: true,
            r0: 1.0,
            dr: DEFAULT_DR,
            proposals: ProposalConfig::default(),
            flow: FlowConfig::default(),
            gp: GpFitOptions::default(),
            mlp: MlpConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |flag: &'static str, message: String| Err(ConfigError::Invalid { flag, message });
        if self.n_init < 2 {
            return invalid("--n-init", format!("need at least 2 initial points, got {}", self.n_init));
        }
        // N = N_I is accepted and degenerates to a pure Latin-hypercube search.
        if self.budget < self.n_init {
            return invalid("--budget", format!("budget {} is below the {} initial points", self.budget, self.n_init));
        }
        if self.batch < 1 {
            return invalid("--batch", "batch size must be >= 1".into());
        }
        if !(self.acquisition.exploration >= 0.0) {
            return invalid("--X", format!("must be >= 0, got {}", self.acquisition.exploration));
        }
        if !(self.acquisition.ucb_beta >= 0.0) {
            return invalid("--ucb-beta", format!("must be >= 0, got {}", self.acquisition.ucb_beta));
        }
        if !(self.beta_max > 0.0) {
            return invalid("--beta-max", format!("must be > 0, got {}", self.beta_max));
        }
        if !(0.0..=1.0).contains(&self.greedy_fraction) {
            return invalid("--greedy-fraction", format!("must lie in [0, 1], got {}", self.greedy_fraction));
        }
        if !(self.r0 > 0.0) || !(self.dr > 0.0) {
            return invalid("--R0/--dR", "radius and step must be positive".into());
        }
        if !(self.flow.bw > 0.0) {
            return invalid("--bw", format!("must be > 0, got {}", self.flow.bw));
        }
        if self.proposals.per_dim == 0 {
            return invalid("--proposals-per-dim", "must be >= 1".into());
        }
        if self.surrogate == SurrogateKind::Nn && self.acquisition.kind.needs_gp() {
            return invalid("--af", format!("`{}` needs the GP surrogate", self.acquisition.kind));
        }
        Ok(())
    }
}

/// One objective call.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub call_index: usize,
    /// Domain coordinates.
    pub theta: Vec<f64>,
    pub f_value: f64,
    pub best_so_far: f64,
    pub beta: Option<f64>,
    pub radius: Option<f64>,
    pub mode: Mode,
    /// Milliseconds since the run started, at the end of this call.
    pub wall_ms: f64,
}

/// Wall-clock breakdown of one outer iteration, in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IterationTiming {
    pub flow_fit: f64,
    pub surrogate_fit: f64,
    pub proposals: f64,
    pub scoring: f64,
    pub evaluation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Complete,
    Aborted(String),
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub log: EvaluationLog,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub trace: Vec<TraceRecord>,
    pub timings: Vec<IterationTiming>,
    pub status: RunStatus,
}

impl OptimizationResult {
    /// A run that failed before its first evaluation.
    pub fn aborted(dim: usize, message: String) -> Self {
        Self {
            log: EvaluationLog::new(dim),
            best_point: Vec::new(),
            best_value: f64::NAN,
            trace: Vec::new(),
            timings: Vec::new(),
            status: RunStatus::Aborted(message),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }
}

pub enum Surrogate {
    Gp(GpModel),
    Nn(MlpModel),
}

impl Surrogate {
    pub fn mean(&self, q: &[Vec<f64>]) -> Vec<f64> {
        match self {
            Surrogate::Gp(m) => m.predict_mean(q),
            Surrogate::Nn(m) => m.predict(q),
        }
    }

    pub fn gp(&self) -> Option<&GpModel> {
        match self {
            Surrogate::Gp(m) => Some(m),
            Surrogate::Nn(_) => None,
        }
    }
}

/// Mutable state of a run, advanced one outer iteration at a time by
/// [`RunState::step`].
pub struct RunState<'a> {
    objective: &'a Objective,
    config: OptimizerConfig,
    log: EvaluationLog,
    trace: Vec<TraceRecord>,
    timings: Vec<IterationTiming>,
    schedule: AnnealSchedule,
    trust: TrustState,
    iteration: usize,
    started: Instant,
    rng_proposals: StreamRng,
    rng_flow: StreamRng,
    rng_ts: StreamRng,
    rng_nn: StreamRng,
}

fn evaluate(objective: &Objective, u: &[f64], call: usize) -> Result<(Vec<f64>, f64), DloError> {
    let theta = objective.domain().from_unit(u)?;
    let f = objective.evaluate(&theta).map_err(|message| DloError::Objective { call, message })?;
    Ok((theta, f))
}

impl<'a> RunState<'a> {
    /// Validates the configuration and evaluates the initial design.
    pub fn initialize(objective: &'a Objective, config: OptimizerConfig) -> Result<Self, (DloError, Option<Self>)> {
        config.validate().map_err(|e| (e.into(), None))?;
        let d = objective.dim();
        let streams = RngState::new(config.seed);
        let steps = AnnealSchedule::steps(config.budget, config.n_init, config.batch);
        let mut state = Self {
            objective,
            log: EvaluationLog::new(d),
            trace: Vec::with_capacity(config.budget),
            timings: Vec::new(),
            schedule: AnnealSchedule::disabled(steps, config.greedy_fraction),
            trust: TrustState::new(config.r0, config.dr),
            iteration: 0,
            started: Instant::now(),
            rng_proposals: streams.stream(Stream::Proposals),
            rng_flow: streams.stream(Stream::Flow),
            rng_ts: streams.stream(Stream::Thompson),
            rng_nn: streams.stream(Stream::Network),
            config,
        };
        let init = latin_hypercube(state.config.n_init, d, &mut streams.stream(Stream::Init));
        for u in init {
            if let Err(e) = state.record(u, None, None, Mode::Init) {
                return Err((e, Some(state)));
            }
        }
        state.schedule = if state.config.anneal {
            AnnealSchedule::new(state.log.raw_values(), steps, state.config.beta_max, state.config.greedy_fraction)
        } else {
            AnnealSchedule::disabled(steps, state.config.greedy_fraction)
        };
        let (beta0, r0) = (state.schedule.beta_at(0), state.trust.radius);
        for rec in &mut state.trace {
            rec.beta = Some(beta0);
            rec.radius = Some(r0);
        }
        Ok(state)
    }

    fn record(&mut self, u: Vec<f64>, beta: Option<f64>, radius: Option<f64>, mode: Mode) -> Result<(), DloError> {
        let call = self.log.len();
        let (theta, f) = evaluate(self.objective, &u, call)?;
        self.log.push(u, f)?;
        self.trace.push(TraceRecord {
            call_index: call,
            theta,
            f_value: f,
            best_so_far: self.log.best_value().expect("non-empty"),
            beta,
            radius,
            mode,
            wall_ms: self.started.elapsed().as_secs_f64() * 1e3,
        });
        Ok(())
    }

    pub fn log(&self) -> &EvaluationLog {
        &self.log
    }

    pub fn schedule(&self) -> &AnnealSchedule {
        &self.schedule
    }

    pub fn trust(&self) -> &TrustState {
        &self.trust
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn is_done(&self) -> bool {
        self.log.len() >= self.config.budget
    }

    fn fit_surrogate(&mut self, targets: &[f64]) -> Result<Surrogate, DloError> {
        let x = self.log.points();
        Ok(match self.config.surrogate {
            SurrogateKind::Gp => Surrogate::Gp(GpModel::fit_with(x, targets, &self.config.gp)?),
            SurrogateKind::Nn => Surrogate::Nn(MlpModel::fit(x, targets, &self.config.mlp, &mut self.rng_nn)?),
        })
    }

    /// Acquisition values for the proposals and the mode label.
    fn score(&mut self, surrogate: &Surrogate, flow: &Flow, proposals: &[Vec<f64>], beta: f64) -> Result<(Vec<f64>, Mode), DloError> {
        let acq = self.config.acquisition;
        let gp = || surrogate.gp().ok_or(AcquisitionError::NeedsUncertainty(acq.kind.as_str()));
        Ok(match acq.kind {
            AcquisitionKind::Dlo | AcquisitionKind::DloGreedy => {
                let mode = if acq.kind == AcquisitionKind::DloGreedy {
                    Mode::Greedy
                } else {
                    self.schedule.mode_at(self.iteration)
                };
                let s = surrogate.mean(proposals);
                let x = if mode == Mode::Greedy { 0.0 } else { acq.exploration };
                let log_q = if x == 0.0 { vec![0.0; s.len()] } else { proposals.iter().map(|p| flow.log_density(p)).collect() };
                (acquisition::dlo_af(&s, &log_q, x)?, mode)
            }
            AcquisitionKind::Ei => {
                let gp = gp()?;
                let sigma: Vec<f64> = gp.predict_var(proposals).iter().map(|v| v.sqrt()).collect();
                let f_star = beta * self.log.best_value().expect("non-empty");
                (acquisition::ei(&gp.predict_mean(proposals), &sigma, f_star), Mode::Other("ei"))
            }
            AcquisitionKind::Ucb => {
                let gp = gp()?;
                let sigma: Vec<f64> = gp.predict_var(proposals).iter().map(|v| v.sqrt()).collect();
                (acquisition::ucb(&gp.predict_mean(proposals), &sigma, acq.ucb_beta), Mode::Other("ucb"))
            }
            AcquisitionKind::Ts => {
                let gp = gp()?;
                (acquisition::ts(gp, proposals, &mut self.rng_ts)?, Mode::Other("ts"))
            }
        })
    }

    /// One outer iteration; evaluates `min(B, remaining)` new points.
    pub fn step(&mut self) -> Result<(), DloError> {
        if self.is_done() {
            return Ok(());
        }
        let mut timing = IterationTiming::default();
        let beta = self.schedule.beta_at(self.iteration);
        let radius = self.trust.radius;

        let t = Instant::now();
        let flow = Flow::fit(self.log.points(), &self.config.flow, &mut self.rng_flow)?;
        timing.flow_fit = ms(t);

        let t = Instant::now();
        let targets = self.log.annealed_values(beta);
        let surrogate = self.fit_surrogate(&targets)?;
        timing.surrogate_fit = ms(t);

        let t = Instant::now();
        let center = self.log.best_point().expect("initialized").to_vec();
        let mean = |q: &[Vec<f64>]| surrogate.mean(q);
        let proposals =
            proposal::generate_proposals(&center, &flow, &mean, &self.trust, &self.config.proposals, &mut self.rng_proposals);
        timing.proposals = ms(t);

        let t = Instant::now();
        let (af, mode) = self.score(&surrogate, &flow, &proposals.points, beta)?;
        let take = self.config.batch.min(self.config.budget - self.log.len());
        let chosen = acquisition::select_batch(&af, take)?;
        timing.scoring = ms(t);

        let t = Instant::now();
        let old_best = self.log.best_value().expect("initialized");
        for idx in chosen {
            self.record(proposals.points[idx].clone(), Some(beta), Some(radius), mode)?;
        }
        let improved = self.trust.is_improvement(old_best, self.log.best_value().expect("initialized"));
        self.trust.update(improved);
        timing.evaluation = ms(t);

        self.timings.push(timing);
        self.iteration += 1;
        Ok(())
    }

    pub fn finish(self, status: RunStatus) -> OptimizationResult {
        let (best_point, best_value) = match self.log.best_index() {
            Some(i) => (self.trace[i].theta.clone(), self.log.raw_values()[i]),
            None => (Vec::new(), f64::NAN),
        };
        OptimizationResult { log: self.log, best_point, best_value, trace: self.trace, timings: self.timings, status }
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the optimizer for exactly `config.budget` evaluations. Failures
/// after validation (objective errors, numerical breakdowns) stop the run and
/// return the partial trace with an [`RunStatus::Aborted`] status.
pub fn run(objective: &Objective, config: OptimizerConfig) -> Result<OptimizationResult, DloError> {
    let mut state = match RunState::initialize(objective, config) {
        Ok(s) => s,
        Err((e, Some(partial))) => return Ok(partial.finish(RunStatus::Aborted(e.to_string()))),
        Err((e, None)) => return Err(e),
    };
    while !state.is_done() {
        if let Err(e) = state.step() {
            return Ok(state.finish(RunStatus::Aborted(e.to_string())));
        }
    }
    debug_assert_eq!(state.log.len(), state.config.budget);
    Ok(state.finish(RunStatus::Complete))
}

/// Random-search baseline: `n_init` Latin-hypercube points, then uniform
/// draws, `budget` calls in total.
pub fn random_search(objective: &Objective, budget: usize, n_init: usize, seed: u64) -> OptimizationResult {
    let d = objective.dim();
    let streams = RngState::new(seed);
    let n_init = n_init.min(budget);
    let mut points = if n_init > 0 { latin_hypercube(n_init, d, &mut streams.stream(Stream::Init)) } else { Vec::new() };
    let mut rng = streams.stream(Stream::Baseline);
    points.extend(uniform_cube(budget - n_init, d, &mut rng));
    let started = Instant::now();
    let mut log = EvaluationLog::new(d);
    let mut trace = Vec::with_capacity(budget);
    let mut status = RunStatus::Complete;
    for (call, u) in points.into_iter().enumerate() {
        let mode = if call < n_init { Mode::Init } else { Mode::Other("random") };
        match evaluate(objective, &u, call) {
            Ok((theta, f)) => {
                log.push(u, f).expect("unit-cube draw");
                trace.push(TraceRecord {
                    call_index: call,
                    theta,
                    f_value: f,
                    best_so_far: log.best_value().expect("non-empty"),
                    beta: None,
                    radius: None,
                    mode,
                    wall_ms: ms(started),
                });
            }
            Err(e) => {
                status = RunStatus::Aborted(e.to_string());
                break;
            }
        }
    }
    let (best_point, best_value) = match log.best_index() {
        Some(i) => (trace[i].theta.clone(), log.raw_values()[i]),
        None => (Vec::new(), f64::NAN),
    };
    OptimizationResult { log, best_point, best_value, trace, timings: Vec::new(), status }
}
