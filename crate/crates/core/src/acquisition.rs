//! Acquisition functions and batch selection over a finite proposal set.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AcquisitionError, GpError};
use crate::gp::GpModel;
use crate::normal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcquisitionKind {
    /// Surrogate mean minus `X` times the flow log-density.
    Dlo,
    /// Surrogate mean alone.
    DloGreedy,
    Ei,
    Ucb,
    Ts,
}

impl AcquisitionKind {
    pub const ALL: [AcquisitionKind; 5] = [Self::Dlo, Self::DloGreedy, Self::Ei, Self::Ucb, Self::Ts];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Dlo => "dlo",
            Self::DloGreedy => "dlo-greedy",
            Self::Ei => "ei",
            Self::Ucb => "ucb",
            Self::Ts => "ts",
        }
    }

    /// Whether the function needs posterior uncertainty.
    pub fn needs_gp(&self) -> bool {
        matches!(self, Self::Ei | Self::Ucb | Self::Ts)
    }
}

impl fmt::Display for AcquisitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AcquisitionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown acquisition `{s}` (expected dlo, dlo-greedy, ei, ucb or ts)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    pub kind: AcquisitionKind,
    /// Weight `X` on the log-density penalty.
    pub exploration: f64,
    pub ucb_beta: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self { kind: AcquisitionKind::Dlo, exploration: 0.01, ucb_beta: 1.0 }
    }
}

/// `s_i − X · ln q_i`.
pub fn dlo_af(surrogate: &[f64], log_q: &[f64], exploration: f64) -> Result<Vec<f64>, AcquisitionError> {
    if surrogate.len() != log_q.len() {
        return Err(AcquisitionError::LengthMismatch(surrogate.len(), log_q.len()));
    }
    surrogate
        .iter()
        .zip(log_q)
        .enumerate()
        .map(|(index, (s, lq))| {
            if !(s.is_finite() && lq.is_finite()) {
                return Err(AcquisitionError::NonFinite { index });
            }
            // X = 0 must reproduce s exactly
            Ok(if exploration == 0.0 { *s } else { s - exploration * lq })
        })
        .collect()
}

/// Expected improvement over `f_star`; zero-σ entries reduce to
/// `max(μ − f*, 0)`.
pub fn ei(mu: &[f64], sigma: &[f64], f_star: f64) -> Vec<f64> {
    mu.iter()
        .zip(sigma)
        .map(|(&m, &s)| {
            let imp = m - f_star;
            if s <= 0.0 {
                return imp.max(0.0);
            }
            let z = imp / s;
            (imp * normal::cdf(z) + s * normal::pdf(z)).max(0.0)
        })
        .collect()
}

pub fn ucb(mu: &[f64], sigma: &[f64], beta: f64) -> Vec<f64> {
    mu.iter().zip(sigma).map(|(m, s)| if beta == 0.0 { *m } else { m + beta * s }).collect()
}

/// Thompson sampling: one joint posterior draw over the proposals.
pub fn ts<R: Rng + ?Sized>(model: &GpModel, proposals: &[Vec<f64>], rng: &mut R) -> Result<Vec<f64>, GpError> {
    model.sample_posterior(proposals, rng)
}

/// Indices of the `batch` largest values, ties broken by lower index.
pub fn select_batch(af: &[f64], batch: usize) -> Result<Vec<usize>, AcquisitionError> {
    if batch > af.len() {
        return Err(AcquisitionError::BatchTooLarge { batch, proposals: af.len() });
    }
    if let Some(index) = af.iter().position(|v| v.is_nan()) {
        return Err(AcquisitionError::NonFinite { index });
    }
    let mut idx: Vec<usize> = (0..af.len()).collect();
    // stable sort keeps lower indices first among equal values
    idx.sort_by(|&a, &b| af[b].total_cmp(&af[a]));
    idx.truncate(batch);
    Ok(idx)
}
