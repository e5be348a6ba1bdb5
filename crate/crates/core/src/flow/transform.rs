//! Monotone 1D Gaussianization `t ↦ Φ⁻¹(F̂(t))` with `F̂` a Gaussian KDE CDF.

use std::sync::OnceLock;

use crate::error::FlowError;
use crate::normal::{self, LN_SQRT_2PI};

/// Probability clamp applied before Φ⁻¹.
pub const CLIP: f64 = 1e-7;
const BANDWIDTH_FLOOR: f64 = 1e-6;
/// Kernels further than this many bandwidths away contribute 0 or 1 to the
/// CDF to within double precision.
const WINDOW: f64 = normal::TABLE_REACH;
const MAX_BRACKET_DOUBLINGS: usize = 60;
/// Grid size of the lookup table that seeds [`Transform1D::inverse`].
const TABLE_SIZE: usize = 96;

/// Scott's rule `bw · σ̂ · n^{-1/5}`, with σ̂ the sample standard deviation
/// floored at 1e-6.
pub fn scott_bandwidth(projections: &[f64], bw: f64) -> f64 {
    let n = projections.len() as f64;
    let mean = projections.iter().sum::<f64>() / n;
    let var = projections.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    bw * var.sqrt().max(BANDWIDTH_FLOOR) * n.powf(-0.2)
}

/// Nodes `t`, their images `z` and slopes `dz/dt`.
#[derive(Clone, Debug)]
struct InverseTable {
    t: Vec<f64>,
    z: Vec<f64>,
    slope: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Transform1D {
    knots: Vec<f64>,
    bandwidth: f64,
    /// Grid over the knot range, built on first inversion.
    table: OnceLock<InverseTable>,
}

impl Transform1D {
    pub fn new(projections: &[f64], bandwidth: f64) -> Self {
        assert!(!projections.is_empty() && bandwidth > 0.0, "Transform1D needs data and a positive bandwidth");
        let mut knots = projections.to_vec();
        knots.sort_by(f64::total_cmp);
        Self { knots, bandwidth, table: OnceLock::new() }
    }

    pub fn fit(projections: &[f64], bw: f64) -> Self {
        Self::new(projections, scott_bandwidth(projections, bw))
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn window(&self, t: f64) -> (usize, usize) {
        let reach = WINDOW * self.bandwidth;
        let lo = self.knots.partition_point(|&k| k < t - reach);
        let hi = self.knots.partition_point(|&k| k <= t + reach);
        (lo, hi)
    }

    /// Lower and upper tail masses `(F̂(t), 1 − F̂(t))`, with the small one
    /// at full relative precision, plus the kernel sum `Σ φ(u)` over the
    /// window.
    fn tails_and_kernel(&self, t: f64) -> (f64, f64, f64) {
        let (lo, hi) = self.window(t);
        let n = self.knots.len();
        let inv_h = 1.0 / self.bandwidth;
        // knots below t each contribute more than one half to the lower mass;
        // only their small complements Φ(−|u|) are summed, and likewise for
        // knots above t, so whichever tail is small is exact
        let split = lo + self.knots[lo..hi].partition_point(|&k| k < t);
        let (mut below, mut above, mut kernel) = (0.0, 0.0, 0.0);
        for &k in &self.knots[lo..split] {
            let (c, p) = normal::cdf_pdf_tabulated((k - t) * inv_h);
            below += c;
            kernel += p;
        }
        for &k in &self.knots[split..hi] {
            let (c, p) = normal::cdf_pdf_tabulated((t - k) * inv_h);
            above += c;
            kernel += p;
        }
        let (n_below, n_above) = (split as f64, (n - split) as f64);
        let nf = n as f64;
        let lower = if split == 0 { above } else { n_below - below + above };
        let upper = if split == n { below } else { n_above - above + below };
        (lower / nf, upper / nf, kernel)
    }

    fn tails(&self, t: f64) -> (f64, f64) {
        let (lower, upper, _) = self.tails_and_kernel(t);
        (lower, upper)
    }

    fn ln_norm(&self) -> f64 {
        (self.knots.len() as f64 * self.bandwidth).ln()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.tails(t).0
    }

    /// ln f̂(t); stays finite arbitrarily far from the knots.
    pub fn ln_pdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.window(t);
        let inv_h = 1.0 / self.bandwidth;
        let norm = self.ln_norm();
        if lo < hi {
            let s: f64 = self.knots[lo..hi].iter().map(|k| normal::cdf_pdf_tabulated((t - k) * inv_h).1).sum();
            if s > 0.0 {
                return s.ln() - norm;
            }
        }
        // far tail: log-sum-exp over every knot
        let e: Vec<f64> = self.knots.iter().map(|k| -0.5 * ((t - k) * inv_h).powi(2)).collect();
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + e.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - norm - LN_SQRT_2PI
    }

    fn latent(&self, t: f64) -> f64 {
        let (lower, upper) = self.tails(t);
        Self::latent_from_tails(lower, upper)
    }

    fn latent_from_tails(lower: f64, upper: f64) -> f64 {
        if lower <= upper {
            normal::ppf(lower.max(CLIP))
        } else {
            -normal::ppf(upper.max(CLIP))
        }
    }

    /// `(z, ln dz/dt)` with `z = Φ⁻¹(clip(F̂(t)))` and
    /// `ln dz/dt = ln f̂(t) − ln φ(z)`.
    pub fn forward(&self, t: f64) -> (f64, f64) {
        let (lower, upper, kernel) = self.tails_and_kernel(t);
        let z = Self::latent_from_tails(lower, upper);
        let ln_pdf = if kernel > 0.0 { kernel.ln() - self.ln_norm() } else { self.ln_pdf(t) };
        (z, ln_pdf - normal::ln_pdf(z))
    }

    fn table(&self) -> &InverseTable {
        self.table.get_or_init(|| {
            let reach = WINDOW * self.bandwidth;
            let a = self.knots[0] - reach;
            let b = self.knots[self.knots.len() - 1] + reach;
            let t: Vec<f64> = (0..TABLE_SIZE).map(|i| a + (b - a) * i as f64 / (TABLE_SIZE - 1) as f64).collect();
            let (z, slope) = t.iter().map(|&t| self.forward(t)).map(|(z, lj)| (z, lj.exp())).unzip();
            InverseTable { t, z, slope }
        })
    }

    /// Largest |z| the clipped map can produce.
    pub fn latent_bound() -> f64 {
        -normal::ppf(CLIP)
    }

    /// Solves `forward(t).0 = z` by a Newton iteration safeguarded with
    /// bisection inside an expanding bracket.
    pub fn inverse(&self, z: f64) -> Result<f64, FlowError> {
        if !z.is_finite() || z.abs() >= Self::latent_bound() {
            return Err(FlowError::Inversion { target: z });
        }
        let tab = self.table();
        // the table brackets z whenever it lies strictly inside a rising cell
        let j = tab.z.partition_point(|&v| v <= z);
        if j > 0 && j < tab.z.len() && tab.z[j - 1] < z {
            let (lo, hi) = (tab.t[j - 1], tab.t[j]);
            let start = hermite_inverse(tab, j - 1, z).clamp(lo, hi);
            return Ok(self.refine(z, start, lo, hi));
        }
        let first = self.knots[0];
        let last = *self.knots.last().expect("non-empty");
        let mut width = (last - first).max(self.bandwidth);
        let (mut lo, mut hi) = (first - width, last + width);
        let mut doublings = 0;
        while self.latent(lo) >= z {
            width *= 2.0;
            lo = first - width;
            doublings += 1;
            if doublings > MAX_BRACKET_DOUBLINGS {
                return Err(FlowError::Inversion { target: z });
            }
        }
        while self.latent(hi) <= z {
            width *= 2.0;
            hi = last + width;
            doublings += 1;
            if doublings > MAX_BRACKET_DOUBLINGS {
                return Err(FlowError::Inversion { target: z });
            }
        }
        // start at the empirical quantile
        let p = normal::cdf(z);
        let idx = ((p * self.knots.len() as f64) as usize).min(self.knots.len() - 1);
        Ok(self.refine(z, self.knots[idx].clamp(lo, hi), lo, hi))
    }

    /// Newton iteration from `t` that falls back to bisection whenever a step
    /// would leave the bracket `[lo, hi]`.
    fn refine(&self, z: f64, mut t: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let (zt, log_slope) = self.forward(t);
            let g = zt - z;
            if g == 0.0 {
                return t;
            }
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let newton = t - g / log_slope.exp();
            let in_bracket = newton > lo && newton < hi && newton.is_finite();
            let next = if in_bracket { newton } else { 0.5 * (lo + hi) };
            let scale = t.abs().max(1.0);
            // a Newton step of size s leaves an error of order s²/h, so a
            // 1e-6 step already lands within ~1e-11 of the root
            if (in_bracket && (next - t).abs() <= 1e-6 * scale) || hi - lo <= 1e-12 * scale {
                return next;
            }
            t = next;
        }
        t
    }
}

/// Cubic Hermite interpolation of `t(z)` on cell `[j, j+1]`, using
/// `dt/dz = 1/slope` at both ends.
fn hermite_inverse(tab: &InverseTable, j: usize, z: f64) -> f64 {
    let (z0, z1) = (tab.z[j], tab.z[j + 1]);
    let dz = z1 - z0;
    let s = (z - z0) / dz;
    let (t0, t1) = (tab.t[j], tab.t[j + 1]);
    let m0 = dz / tab.slope[j];
    let m1 = dz / tab.slope[j + 1];
    let (s2, s3) = (s * s, s * s * s);
    let t = (2.0 * s3 - 3.0 * s2 + 1.0) * t0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * t1 + (s3 - s2) * m1;
    if t.is_finite() {
        t
    } else {
        t0 + s * (t1 - t0)
    }
}
