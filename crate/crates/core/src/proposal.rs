//! Candidate generation: a trust-region box (or Gaussian) around the
//! incumbent plus a Gaussian ball in the flow's latent space.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::flow::Flow;

pub const DEFAULT_DR: f64 = std::f64::consts::LOG10_2;
pub const R_MIN: f64 = 1e-3;
pub const R_MAX: f64 = 1.0;
pub const IMPROVEMENT_TOL: f64 = 5e-6;
/// Consecutive non-improving iterations before the radius shrinks.
pub const FAILURE_LIMIT: usize = 2;
/// Minimum relative half-width on axes the gradient barely touches.
pub const AXIS_FLOOR: f64 = 0.05;
const FD_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrustState {
    pub radius: f64,
    /// log10 of the grow/shrink factor.
    pub dr: f64,
    pub fail_count: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub improvement_tol: f64,
}

impl Default for TrustState {
    fn default() -> Self {
        Self::new(1.0, DEFAULT_DR)
    }
}

impl TrustState {
    pub fn new(r0: f64, dr: f64) -> Self {
        Self {
            radius: r0.clamp(R_MIN, R_MAX),
            dr,
            fail_count: 0,
            r_min: R_MIN,
            r_max: R_MAX,
            improvement_tol: IMPROVEMENT_TOL,
        }
    }

    /// Whether moving the incumbent from `old_best` to `new_best` counts as
    /// an improvement.
    pub fn is_improvement(&self, old_best: f64, new_best: f64) -> bool {
        new_best - old_best > self.improvement_tol
    }

    pub fn update(&mut self, improved: bool) {
        let factor = 10f64.powf(self.dr);
        if improved {
            self.radius = (self.radius * factor).min(self.r_max);
            self.fail_count = 0;
        } else {
            self.fail_count += 1;
            if self.fail_count >= FAILURE_LIMIT {
                self.radius = (self.radius / factor).max(self.r_min);
                self.fail_count = 0;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputProposal {
    #[default]
    Rect,
    Sphere,
}

impl FromStr for InputProposal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rect" => Ok(Self::Rect),
            "sphere" => Ok(Self::Sphere),
            _ => Err(format!("unknown input proposal `{s}` (expected rect or sphere)")),
        }
    }
}

impl fmt::Display for InputProposal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rect => "rect",
            Self::Sphere => "sphere",
        })
    }
}

/// Per-axis half-widths `R · max(|ĝ_i|, 0.05)` (or `R` without a gradient).
pub fn half_widths(radius: f64, grad_unit: Option<&[f64]>, dim: usize) -> Vec<f64> {
    match grad_unit {
        Some(g) => g.iter().map(|gi| radius * gi.abs().max(AXIS_FLOOR)).collect(),
        None => vec![radius; dim],
    }
}

/// Draws `n` points around `center` in the unit cube. The rectangle shape
/// samples uniformly from the box intersected with the cube; the sphere
/// shape draws `N(center, diag(w²))` and clamps.
pub fn propose_input_space<R: Rng + ?Sized>(
    center: &[f64],
    radius: f64,
    grad_unit: Option<&[f64]>,
    n: usize,
    shape: InputProposal,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let w = half_widths(radius, grad_unit, center.len());
    (0..n)
        .map(|_| {
            center
                .iter()
                .zip(&w)
                .map(|(&c, &wi)| match shape {
                    InputProposal::Rect => {
                        let lo = (c - wi).max(0.0);
                        let hi = (c + wi).min(1.0);
                        if hi > lo {
                            lo + rng.gen::<f64>() * (hi - lo)
                        } else {
                            c.clamp(0.0, 1.0)
                        }
                    }
                    InputProposal::Sphere => (c + wi * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0),
                })
                .collect()
        })
        .collect()
}

/// Unit vector along the central finite-difference gradient of `mean` at
/// `center`, or `None` when the gradient vanishes.
pub fn surrogate_gradient_direction(mean: &dyn Fn(&[Vec<f64>]) -> Vec<f64>, center: &[f64]) -> Option<Vec<f64>> {
    let d = center.len();
    let mut probes = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut p = center.to_vec();
        p[i] += FD_STEP;
        probes.push(p);
        let mut m = center.to_vec();
        m[i] -= FD_STEP;
        probes.push(m);
    }
    let vals = mean(&probes);
    let g: Vec<f64> = (0..d).map(|i| (vals[2 * i] - vals[2 * i + 1]) / (2.0 * FD_STEP)).collect();
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| g.iter().map(|v| v / norm).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProposalConfig {
    /// Proposals per input dimension.
    pub per_dim: usize,
    pub shape: InputProposal,
    /// When false the input-space half is drawn uniformly over the cube.
    pub local_box: bool,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        Self { per_dim: 100, shape: InputProposal::Rect, local_box: true }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Proposals {
    pub points: Vec<Vec<f64>>,
    /// Points drawn in input space (including latent fallbacks).
    pub n_input: usize,
    pub n_latent: usize,
    pub latent_failed: usize,
}

/// `per_dim · d` proposals: the first ⌈half⌉ in input space around `center`
/// (scaled by the surrogate gradient direction), the rest from the flow's
/// latent ball of radius `R` centered on the same point. Latent draws that
/// cannot be inverted are replaced by input-space draws.
pub fn generate_proposals<R: Rng + ?Sized>(
    center: &[f64],
    flow: &Flow,
    surrogate_mean: &dyn Fn(&[Vec<f64>]) -> Vec<f64>,
    trust: &TrustState,
    config: &ProposalConfig,
    rng: &mut R,
) -> Proposals {
    let d = center.len();
    let total = config.per_dim * d;
    let n_input = total.div_ceil(2);
    let n_latent = total / 2;
    let grad = surrogate_gradient_direction(surrogate_mean, center);
    let draw_input = |n: usize, rng: &mut R| {
        if config.local_box {
            propose_input_space(center, trust.radius, grad.as_deref(), n, config.shape, rng)
        } else {
            propose_input_space(&vec![0.5; d], 0.5, None, n, InputProposal::Rect, rng)
        }
    };
    let mut points = draw_input(n_input, rng);
    let latent = flow.sample_latent_ball(center, trust.radius, n_latent, rng);
    let accepted = latent.points.len();
    points.extend(latent.points);
    if latent.failed > 0 {
        points.extend(draw_input(latent.failed, rng));
    }
    Proposals { points, n_input: n_input + latent.failed, n_latent: accepted, latent_failed: latent.failed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngState, Stream};

    #[test]
    fn radius_caps_and_shrink() {
        let mut s = TrustState::new(1.0, DEFAULT_DR);
        s.update(true);
        assert_eq!((s.radius, s.fail_count), (1.0, 0));
        s.update(false);
        assert_eq!(s.radius, 1.0);
        s.update(false);
        assert!((s.radius - 0.5).abs() < 1e-15);
        assert_eq!(s.fail_count, 0);
        let mut low = TrustState::new(R_MIN, DEFAULT_DR);
        for _ in 0..10 {
            low.update(false);
        }
        assert_eq!(low.radius, R_MIN);
        assert!(s.is_improvement(1.0, 1.0 + 6e-6));
        assert!(!s.is_improvement(1.0, 1.0 + 4e-6));
    }

    #[test]
    fn full_cube_without_gradient() {
        let mut rng = RngState::new(1).stream(Stream::Proposals);
        let pts = propose_input_space(&[0.5, 0.5], 1.0, None, 4000, InputProposal::Rect, &mut rng);
        let mean = pts.iter().map(|p| p[0]).sum::<f64>() / 4000.0;
        let below = pts.iter().filter(|p| p[1] < 0.25).count() as f64 / 4000.0;
        assert!((mean - 0.5).abs() < 0.02 && (below - 0.25).abs() < 0.03);
        assert!(pts.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn gradient_scaled_widths() {
        let mut rng = RngState::new(2).stream(Stream::Proposals);
        let mut g = vec![0.0; 5];
        g[0] = 1.0;
        assert_eq!(half_widths(0.2, Some(&g), 5), vec![0.2, 0.010000000000000002, 0.010000000000000002, 0.010000000000000002, 0.010000000000000002]);
        let c = vec![0.5; 5];
        for p in propose_input_space(&c, 0.2, Some(&g), 500, InputProposal::Rect, &mut rng) {
            assert!((p[0] - 0.5).abs() <= 0.2);
            assert!(p[1..].iter().all(|v| (v - 0.5).abs() <= 0.01 + 1e-15));
        }
    }

    #[test]
    fn degenerate_radius() {
        let mut rng = RngState::new(3).stream(Stream::Proposals);
        let c = [0.3, 0.9];
        for shape in [InputProposal::Rect, InputProposal::Sphere] {
            for p in propose_input_space(&c, 0.0, None, 10, shape, &mut rng) {
                assert_eq!(p, c.to_vec());
            }
        }
    }

    #[test]
    fn gradient_direction_of_linear_mean() {
        let mean = |q: &[Vec<f64>]| q.iter().map(|p| 3.0 * p[0] - 4.0 * p[1]).collect::<Vec<_>>();
        let g = surrogate_gradient_direction(&mean, &[0.5, 0.5]).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-8 && (g[1] + 0.8).abs() < 1e-8);
        let flat = |q: &[Vec<f64>]| vec![1.0; q.len()];
        assert!(surrogate_gradient_direction(&flat, &[0.5, 0.5]).is_none());
    }

    #[test]
    fn proposal_counts_and_bounds() {
        let mut rng = RngState::new(4).stream(Stream::Proposals);
        let flow = Flow::identity(10);
        let mean = |q: &[Vec<f64>]| q.iter().map(|p| p[0]).collect::<Vec<_>>();
        let trust = TrustState::default();
        let c = vec![0.5; 10];
        for local_box in [true, false] {
            let cfg = ProposalConfig { local_box, ..Default::default() };
            let p = generate_proposals(&c, &flow, &mean, &trust, &cfg, &mut rng);
            assert_eq!(p.points.len(), 1000);
            assert_eq!(p.n_input + p.n_latent, 1000);
            assert_eq!(p.n_latent, 500);
            assert!(p.points.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn deterministic_with_seed() {
        let flow = Flow::identity(3);
        let mean = |q: &[Vec<f64>]| q.iter().map(|p| p[1]).collect::<Vec<_>>();
        let run = || {
            let mut rng = RngState::new(9).stream(Stream::Proposals);
            generate_proposals(&[0.2, 0.4, 0.6], &flow, &mean, &TrustState::new(0.3, DEFAULT_DR), &ProposalConfig::default(), &mut rng).points
        };
        assert_eq!(run(), run());
    }
}
