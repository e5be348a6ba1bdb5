//! Greedy search for non-Gaussian projection directions.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::FlowError;
use crate::normal;

pub const RANDOM_CANDIDATES: usize = 64;

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Project out `basis` (two Gram–Schmidt passes) and normalize. Returns the
/// norm left after the first pass.
fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    let mut residual = 0.0;
    for pass in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n = normalize(v);
        if pass == 0 {
            residual = n;
        }
    }
    residual
}

/// Squared 1D Wasserstein-2 distance between the projections of `points` on
/// `dir` and a standard normal, using the matching normal quantiles.
pub fn w2_to_normal(points: &[Vec<f64>], dir: &[f64], quantiles: &[f64], buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.extend(points.iter().map(|p| dot(p, dir)));
    buf.sort_by(f64::total_cmp);
    buf.iter().zip(quantiles).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / buf.len() as f64
}

/// Standard normal quantiles at `(i + ½)/n`.
pub fn normal_quantiles(n: usize) -> Vec<f64> {
    (0..n).map(|i| normal::ppf((i as f64 + 0.5) / n as f64)).collect()
}

/// Picks `k` orthonormal directions one at a time from a pool of random
/// unit vectors plus the coordinate axes, each time taking the candidate
/// (orthogonalized against earlier picks) whose projection is furthest
/// from a standard normal in W2.
pub fn find_directions<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Result<Vec<Vec<f64>>, FlowError> {
    if points.len() < 2 {
        return Err(FlowError::TooFewPoints(points.len()));
    }
    let d = points[0].len();
    let k = k.clamp(1, d);
    let mut pool: Vec<Vec<f64>> = (0..RANDOM_CANDIDATES)
        .map(|_| {
            let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            normalize(&mut v);
            v
        })
        .collect();
    pool.extend((0..d).map(|i| {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    }));

    let quantiles = normal_quantiles(points.len());
    let mut buf = Vec::with_capacity(points.len());
    let mut picked: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut cand = vec![0.0; d];
    while picked.len() < k {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for c in &pool {
            cand.copy_from_slice(c);
            if orthonormalize(&mut cand, &picked) < 1e-6 {
                continue;
            }
            let w = w2_to_normal(points, &cand, &quantiles, &mut buf);
            if best.as_ref().map_or(true, |(bw, _)| w > *bw) {
                best = Some((w, cand.clone()));
            }
        }
        let (_, dir) = best.expect("coordinate axes always leave a usable candidate");
        picked.push(dir);
    }
    Ok(picked)
}
