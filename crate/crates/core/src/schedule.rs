//! Inverse-temperature schedule and the annealed/greedy iteration split.

use std::fmt;

/// Target spread `β₀ · (max f − min f)` of the initial annealed values.
pub const SPREAD_TARGET: f64 = 15.0;
pub const DEFAULT_BETA_MAX: f64 = 100.0;

/// Returns `(β₀, anneal_active)`. No annealing when the raw spread already
/// satisfies the target at `β_max`.
pub fn select_beta0(initial_values: &[f64], beta_max: f64) -> (f64, bool) {
    let max = initial_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = initial_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    if !(spread > 0.0) || beta_max * spread < SPREAD_TARGET {
        return (beta_max, false);
    }
    ((SPREAD_TARGET / spread).min(beta_max), true)
}

/// `n` log-spaced values from `beta0` to `beta_max`, endpoints exact.
pub fn beta_ladder(beta0: f64, beta_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1 && beta0 > 0.0 && beta0 <= beta_max, "invalid ladder");
    if n == 1 {
        return vec![beta_max];
    }
    let ratio = beta_max / beta0;
    (0..n)
        .map(|i| match i {
            0 => beta0,
            i if i == n - 1 => beta_max,
            i => beta0 * ratio.powf(i as f64 / (n - 1) as f64),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Init,
    Annealed,
    Greedy,
    /// Baseline acquisitions and random search have no DLO mode.
    Other(&'static str),
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Init => "init",
            Mode::Annealed => "annealed",
            Mode::Greedy => "greedy",
            Mode::Other(s) => s,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bresenham-style split: iteration `i` is greedy when
/// `⌊(i+1)·fraction⌋ > ⌊i·fraction⌋`.
pub fn mode_for_iteration(i: usize, greedy_fraction: f64) -> Mode {
    let f = greedy_fraction.clamp(0.0, 1.0);
    if ((i + 1) as f64 * f).floor() > (i as f64 * f).floor() {
        Mode::Greedy
    } else {
        Mode::Annealed
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealSchedule {
    pub beta0: f64,
    pub beta_max: f64,
    pub betas: Vec<f64>,
    pub greedy_fraction: f64,
    pub anneal_active: bool,
}

impl AnnealSchedule {
    /// Number of ladder steps `⌊(N − N_I)/B⌋`, at least 1.
    pub fn steps(budget: usize, n_init: usize, batch: usize) -> usize {
        (budget.saturating_sub(n_init) / batch.max(1)).max(1)
    }

    pub fn new(initial_values: &[f64], steps: usize, beta_max: f64, greedy_fraction: f64) -> Self {
        let (beta0, anneal_active) = select_beta0(initial_values, beta_max);
        let betas = if anneal_active { beta_ladder(beta0, beta_max, steps) } else { vec![beta_max; steps] };
        Self { beta0, beta_max, betas, greedy_fraction, anneal_active }
    }

    /// Annealing switched off entirely: β = 1 at every iteration.
    pub fn disabled(steps: usize, greedy_fraction: f64) -> Self {
        Self { beta0: 1.0, beta_max: 1.0, betas: vec![1.0; steps], greedy_fraction, anneal_active: false }
    }

    /// β for outer iteration `i`; holds the last rung past the ladder end.
    pub fn beta_at(&self, i: usize) -> f64 {
        self.betas[i.min(self.betas.len() - 1)]
    }

    pub fn mode_at(&self, i: usize) -> Mode {
        mode_for_iteration(i, self.greedy_fraction)
    }
}
