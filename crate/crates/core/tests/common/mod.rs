//! Numerical oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use dlo::flow::Flow;
use dlo::rng::{Rng, RngState, Stream};
use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> Rng {
    RngState::new(seed).stream(Stream::Flow)
}

pub fn gaussian(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Max componentwise `|inverse(forward(x)) − x|`.
pub fn roundtrip_error(flow: &Flow, points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|x| {
            let back = flow.inverse(&flow.forward(x)).expect("inverse");
            x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// `ln |det ∂forward/∂x|` from a central-difference Jacobian.
pub fn fd_log_det(flow: &Flow, x: &[f64], step: f64) -> f64 {
    let d = x.len();
    let mut jac = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += step;
        minus[j] -= step;
        let (zp, zm) = (flow.forward(&plus), flow.forward(&minus));
        for i in 0..d {
            jac[(i, j)] = (zp[i] - zm[i]) / (2.0 * step);
        }
    }
    jac.determinant().abs().ln()
}

/// Worst relative error `|det_fd / det_analytic − 1|` over `points`.
pub fn jacobian_error(flow: &Flow, points: &[Vec<f64>], step: f64) -> f64 {
    points
        .iter()
        .map(|x| {
            let analytic = flow.forward_with_log_det(x).1;
            ((fd_log_det(flow, x, step) - analytic).exp() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Composite Simpson weights for `n` (odd) nodes on `[a, b]`.
fn simpson(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n % 2 == 1 && n >= 3);
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n).map(|i| a + h * i as f64).collect();
    let weights = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * h / 3.0
        })
        .collect();
    (nodes, weights)
}

pub fn integrate_1d(flow: &Flow, a: f64, b: f64, n: usize) -> f64 {
    let (t, w) = simpson(a, b, n);
    t.iter().zip(&w).map(|(t, w)| w * flow.log_density(&[*t]).exp()).sum()
}

pub fn integrate_2d(flow: &Flow, lo: [f64; 2], hi: [f64; 2], n: usize) -> f64 {
    let (t0, w0) = simpson(lo[0], hi[0], n);
    let (t1, w1) = simpson(lo[1], hi[1], n);
    let mut total = 0.0;
    for (a, wa) in t0.iter().zip(&w0) {
        for (b, wb) in t1.iter().zip(&w1) {
            total += wa * wb * flow.log_density(&[*a, *b]).exp();
        }
    }
    total
}

/// Mean and per-axis standard deviation of a point set.
pub fn moments(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = points[0].len();
    let n = points.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n).collect();
    let sd = (0..d).map(|j| (points.iter().map(|p| (p[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()).collect();
    (mean, sd)
}

/// Two-component Gaussian mixture in `[0,1]^d`-ish coordinates.
pub fn mixture(n: usize, d: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let (c, s) = if i % 3 == 0 { (0.25, 0.05) } else { (0.65, 0.08) };
            (0..d).map(|j| c + 0.02 * j as f64 + s * gaussian(rng)).collect()
        })
        .collect()
}

/// Points on a noisy parabola, the classic curved 2D density.
pub fn banana(n: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let a = 0.15 * gaussian(rng);
            vec![0.5 + a, 0.3 + 2.0 * a * a + 0.03 * gaussian(rng)]
        })
        .collect()
}

/// What the optimizer sees mid-run: a space-filling start plus a cluster.
pub fn optimizer_like(d: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = (0..2 * d).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
    pts.extend((0..60).map(|_| (0..d).map(|_| (0.7 + 0.04 * gaussian(rng)).clamp(0.0, 1.0)).collect()));
    pts
}

/// Jittered copies of random training points, the jitter being `frac` of
/// each axis' standard deviation, so probes stay on the training support.
pub fn near(points: &[Vec<f64>], n: usize, frac: f64, rng: &mut Rng) -> Vec<Vec<f64>> {
    let (_, sd) = moments(points);
    (0..n)
        .map(|_| {
            let p = &points[rng.gen_range(0..points.len())];
            p.iter().zip(&sd).map(|(v, s)| v + frac * s * gaussian(rng)).collect()
        })
        .collect()
}
