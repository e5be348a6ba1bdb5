//! Exact Gaussian-process regression with an isotropic Matérn-5/2 kernel.
//!
//! The prior mean is zero and targets are used as given (no
//! standardization); the annealing level is what keeps their scale in check.
//! Hyperparameters are fitted by a short ADAM ascent on the log marginal
//! likelihood, keeping the best iterate.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::GpError;

pub const NOISE_MIN: f64 = 1e-6;
pub const NOISE_MAX: f64 = 1e-4;
const SQRT5: f64 = 2.236_067_977_499_79;
const LN_2PI: f64 = 1.837_877_066_409_345_5;
const MAX_JITTER: f64 = 1e-4;
const MAX_JOINT_QUERIES: usize = 2000;

/// Matérn-5/2 covariance at distance `r`.
#[inline]
pub fn matern52(r: f64, lengthscale: f64, signal_variance: f64) -> f64 {
    let s = SQRT5 * r / lengthscale;
    signal_variance * (1.0 + s + s * s / 3.0) * (-s).exp()
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpHyper {
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl GpHyper {
    /// Unconstrained coordinates used by the optimizer:
    /// `(ln ℓ, ln σf², c)` with `σn² = exp(ln lo + (ln hi − ln lo)·sigmoid(c))`.
    pub fn to_raw(&self) -> [f64; 3] {
        let span = (NOISE_MAX / NOISE_MIN).ln();
        let frac = ((self.noise_variance.clamp(NOISE_MIN, NOISE_MAX) / NOISE_MIN).ln() / span).clamp(1e-12, 1.0 - 1e-12);
        [self.lengthscale.ln(), self.signal_variance.ln(), (frac / (1.0 - frac)).ln()]
    }

    pub fn from_raw(raw: [f64; 3]) -> Self {
        let span = (NOISE_MAX / NOISE_MIN).ln();
        let sig = 1.0 / (1.0 + (-raw[2]).exp());
        Self {
            lengthscale: raw[0].exp(),
            signal_variance: raw[1].exp(),
            noise_variance: (NOISE_MIN.ln() + span * sig).exp().clamp(NOISE_MIN, NOISE_MAX),
        }
    }

    /// dσn²/dc for the bounded parameterization.
    fn noise_raw_derivative(raw_c: f64) -> f64 {
        let span = (NOISE_MAX / NOISE_MIN).ln();
        let sig = 1.0 / (1.0 + (-raw_c).exp());
        let noise = (NOISE_MIN.ln() + span * sig).exp();
        noise * span * sig * (1.0 - sig)
    }
}

/// ADAM settings for hyperparameter fitting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpFitOptions {
    pub steps: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for GpFitOptions {
    fn default() -> Self {
        Self { steps: 50, learning_rate: 0.1, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

fn kernel_matrix(x: &[Vec<f64>], hyper: &GpHyper) -> DMatrix<f64> {
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = hyper.signal_variance;
        for j in 0..i {
            let v = matern52(sq_dist(&x[i], &x[j]).sqrt(), hyper.lengthscale, hyper.signal_variance);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn cross_kernel(q: &[Vec<f64>], x: &[Vec<f64>], hyper: &GpHyper) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), q.len(), |i, j| {
        matern52(sq_dist(&x[i], &q[j]).sqrt(), hyper.lengthscale, hyper.signal_variance)
    })
}

/// Cholesky of `k + (noise + jitter) I`, escalating jitter tenfold from
/// 1e-10 up to 1e-4. Returns the factor and the jitter actually used.
fn robust_cholesky(k: &DMatrix<f64>, noise: f64) -> Option<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = 0.0;
    loop {
        let mut m = k.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += noise + jitter;
        }
        if let Some(c) = Cholesky::new(m) {
            return Some((c, jitter));
        }
        jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 };
        if jitter > MAX_JITTER * (1.0 + 1e-9) {
            return None;
        }
    }
}

fn check_inputs(x: &[Vec<f64>], y: &[f64], min_n: usize) -> Result<(), GpError> {
    if x.len() < min_n || x.len() != y.len() {
        return Err(GpError::TooFewPoints { needed: min_n, got: x.len().min(y.len()) });
    }
    if let Some(index) = y.iter().position(|v| !v.is_finite()) {
        return Err(GpError::NonFiniteTarget { index });
    }
    Ok(())
}

fn cholesky_error(h: &GpHyper) -> GpError {
    GpError::Cholesky { lengthscale: h.lengthscale, signal_variance: h.signal_variance, noise_variance: h.noise_variance }
}

fn lml_from_factor(chol: &Cholesky<f64, Dyn>, y: &DVector<f64>) -> (f64, DVector<f64>) {
    let alpha = chol.solve(y);
    let n = y.len() as f64;
    let log_diag: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    (-0.5 * y.dot(&alpha) - log_diag - 0.5 * n * LN_2PI, alpha)
}

/// Log marginal likelihood `−½ yᵀα − Σ ln Lᵢᵢ − (n/2) ln 2π`.
pub fn log_marginal_likelihood(x: &[Vec<f64>], y: &[f64], hyper: &GpHyper) -> Result<f64, GpError> {
    check_inputs(x, y, 1)?;
    let k = kernel_matrix(x, hyper);
    let (chol, _) = robust_cholesky(&k, hyper.noise_variance).ok_or_else(|| cholesky_error(hyper))?;
    Ok(lml_from_factor(&chol, &DVector::from_column_slice(y)).0)
}

/// Log marginal likelihood and its gradient with respect to the raw
/// coordinates of [`GpHyper::to_raw`], via `½ tr((ααᵀ − K⁻¹) ∂K)`.
pub fn lml_with_gradient(x: &[Vec<f64>], y: &[f64], raw: [f64; 3]) -> Result<(f64, [f64; 3]), GpError> {
    check_inputs(x, y, 1)?;
    let hyper = GpHyper::from_raw(raw);
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    // ∂K/∂ln ℓ
    let mut dk_ell = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = hyper.signal_variance;
        for j in 0..i {
            let s = SQRT5 * sq_dist(&x[i], &x[j]).sqrt() / hyper.lengthscale;
            let e = (-s).exp();
            let v = hyper.signal_variance * (1.0 + s + s * s / 3.0) * e;
            let dv = hyper.signal_variance * (s * s / 3.0) * (1.0 + s) * e;
            k[(i, j)] = v;
            k[(j, i)] = v;
            dk_ell[(i, j)] = dv;
            dk_ell[(j, i)] = dv;
        }
    }
    let (chol, _) = robust_cholesky(&k, hyper.noise_variance).ok_or_else(|| cholesky_error(&hyper))?;
    let yv = DVector::from_column_slice(y);
    let (lml, alpha) = lml_from_factor(&chol, &yv);
    let kinv = chol.inverse();
    // W = ααᵀ − K⁻¹; every ∂K is symmetric so the trace is an elementwise sum
    let mut g = [0.0; 3];
    for j in 0..n {
        for i in 0..n {
            let w = alpha[i] * alpha[j] - kinv[(i, j)];
            g[0] += w * dk_ell[(i, j)];
            g[1] += w * k[(i, j)];
            if i == j {
                g[2] += w;
            }
        }
    }
    g[2] *= GpHyper::noise_raw_derivative(raw[2]);
    Ok((lml, [0.5 * g[0], 0.5 * g[1], 0.5 * g[2]]))
}

/// A fitted GP: training data, hyperparameters, Cholesky factor of
/// `K + σn² I` and the solve vector `α`.
#[derive(Clone, Debug)]
pub struct GpModel {
    train_x: Vec<Vec<f64>>,
    train_y: DVector<f64>,
    hyper: GpHyper,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
    lml: f64,
}

impl GpModel {
    /// Conditions on data with fixed hyperparameters.
    pub fn with_hyper(x: &[Vec<f64>], y: &[f64], hyper: GpHyper) -> Result<Self, GpError> {
        check_inputs(x, y, 1)?;
        let k = kernel_matrix(x, &hyper);
        let (chol, jitter) = robust_cholesky(&k, hyper.noise_variance).ok_or_else(|| cholesky_error(&hyper))?;
        let yv = DVector::from_column_slice(y);
        let (lml, alpha) = lml_from_factor(&chol, &yv);
        Ok(Self { train_x: x.to_vec(), train_y: yv, hyper, chol: chol.unpack(), alpha, jitter, lml })
    }

    /// Initial hyperparameters: `ℓ = 0.5√d`, `σf²` the spread of `y` about
    /// the zero prior mean (floored at 1e-6), noise at its lower bound.
    pub fn initial_hyper(x: &[Vec<f64>], y: &[f64]) -> GpHyper {
        let d = x.first().map_or(1, |p| p.len()) as f64;
        let var = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        GpHyper { lengthscale: 0.5 * d.sqrt(), signal_variance: var.max(1e-6), noise_variance: NOISE_MIN }
    }

    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<Self, GpError> {
        Self::fit_with(x, y, &GpFitOptions::default())
    }

    pub fn fit_with(x: &[Vec<f64>], y: &[f64], opts: &GpFitOptions) -> Result<Self, GpError> {
        check_inputs(x, y, 2)?;
        let mut raw = Self::initial_hyper(x, y).to_raw();
        let mut m = [0.0; 3];
        let mut v = [0.0; 3];
        let mut best: Option<(f64, [f64; 3])> = None;
        for step in 0..=opts.steps {
            let (lml, grad) = match lml_with_gradient(x, y, raw) {
                Ok(r) => r,
                Err(e) if best.is_none() => return Err(e),
                Err(_) => break,
            };
            if lml.is_finite() && best.map_or(true, |(b, _)| lml > b) {
                best = Some((lml, raw));
            }
            if step == opts.steps || grad.iter().any(|g| !g.is_finite()) {
                break;
            }
            let t = (step + 1) as i32;
            for i in 0..3 {
                m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * grad[i];
                v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * grad[i] * grad[i];
                let mh = m[i] / (1.0 - opts.beta1.powi(t));
                let vh = v[i] / (1.0 - opts.beta2.powi(t));
                // ascent
                raw[i] += opts.learning_rate * mh / (vh.sqrt() + opts.epsilon);
            }
        }
        let (_, raw) = best.ok_or_else(|| cholesky_error(&GpHyper::from_raw(raw)))?;
        Self::with_hyper(x, y, GpHyper::from_raw(raw))
    }

    pub fn hyper(&self) -> &GpHyper {
        &self.hyper
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    /// Extra diagonal jitter the factorization needed (0 when none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn train_x(&self) -> &[Vec<f64>] {
        &self.train_x
    }

    pub fn train_y(&self) -> &[f64] {
        self.train_y.as_slice()
    }

    pub fn predict_mean(&self, q: &[Vec<f64>]) -> Vec<f64> {
        q.iter()
            .map(|p| {
                self.train_x
                    .iter()
                    .zip(self.alpha.iter())
                    .map(|(x, a)| a * matern52(sq_dist(x, p).sqrt(), self.hyper.lengthscale, self.hyper.signal_variance))
                    .sum()
            })
            .collect()
    }

    /// `L⁻¹ k(X, Q)`, one column per query.
    fn whitened_cross(&self, q: &[Vec<f64>]) -> DMatrix<f64> {
        let mut kxq = cross_kernel(q, &self.train_x, &self.hyper);
        let l = self.chol.view((0, 0), (self.chol.nrows(), self.chol.ncols()));
        l.solve_lower_triangular_mut(&mut kxq);
        kxq
    }

    /// Posterior marginal variances, clamped at zero.
    pub fn predict_var(&self, q: &[Vec<f64>]) -> Vec<f64> {
        let v = self.whitened_cross(q);
        v.column_iter().map(|c| (self.hyper.signal_variance - c.norm_squared()).max(0.0)).collect()
    }

    /// Full posterior covariance `k(Q,Q) − k(Q,X)(K+σn²I)⁻¹k(X,Q)`; the
    /// diagonal is clamped at zero.
    pub fn predict_cov(&self, q: &[Vec<f64>]) -> DMatrix<f64> {
        let v = self.whitened_cross(q);
        let mut cov = kernel_matrix(q, &self.hyper);
        cov.gemm_tr(-1.0, &v, &v, 1.0);
        for i in 0..cov.nrows() {
            cov[(i, i)] = cov[(i, i)].max(0.0);
        }
        cov
    }

    /// One joint draw `μ(Q) + L z` from the posterior at `q`.
    pub fn sample_posterior<R: Rng + ?Sized>(&self, q: &[Vec<f64>], rng: &mut R) -> Result<Vec<f64>, GpError> {
        if q.len() > MAX_JOINT_QUERIES {
            return Err(GpError::TooManyQueries(q.len()));
        }
        let mean = self.predict_mean(q);
        let cov = self.predict_cov(q);
        let scale = cov.diagonal().max().max(1.0);
        let mut jitter = 1e-10;
        let chol = loop {
            let mut m = cov.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += jitter * scale;
            }
            if let Some(c) = Cholesky::new(m) {
                break c;
            }
            jitter *= 10.0;
            if jitter > 1e-4 {
                return Err(GpError::Sampling);
            }
        };
        let z = DVector::from_iterator(q.len(), (0..q.len()).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let lz = chol.l_dirty().lower_triangle() * z;
        Ok(mean.iter().zip(lz.iter()).map(|(m, d)| m + d).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngState, Stream};
    use crate::sampling::uniform_cube;

    /// Dense oracle: explicit inverse and LU determinant.
    fn dense_lml(x: &[Vec<f64>], y: &[f64], h: &GpHyper) -> f64 {
        let n = x.len();
        let k = DMatrix::from_fn(n, n, |i, j| {
            matern52(sq_dist(&x[i], &x[j]).sqrt(), h.lengthscale, h.signal_variance)
                + if i == j { h.noise_variance } else { 0.0 }
        });
        let yv = DVector::from_column_slice(y);
        let kinv = k.clone().try_inverse().unwrap();
        -0.5 * (yv.transpose() * kinv * &yv)[0] - 0.5 * k.determinant().ln() - 0.5 * n as f64 * LN_2PI
    }

    #[test]
    fn matern_values() {
        assert_eq!(matern52(0.0, 0.7, 2.5), 2.5);
        assert!((matern52(1.3, 1.3, 1.0) - 0.523_994_108_831_820_3).abs() < 1e-12);
        assert!(matern52(31.0, 1.0, 1.0) < 1e-12);
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let v = matern52(i as f64 * 0.01, 0.5, 1.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn scalar_lml() {
        let h = GpHyper { lengthscale: 1.0, signal_variance: 1.0, noise_variance: 1e-6 };
        let v = log_marginal_likelihood(&[vec![0.0]], &[0.0], &h).unwrap();
        assert!((v - (-0.5 * LN_2PI - 0.5 * (1.0f64 + 1e-6).ln())).abs() < 1e-12);
        assert!((v + 0.918_939).abs() < 1e-6);
        let y0 = 1.7;
        let v = log_marginal_likelihood(&[vec![0.3]], &[y0], &h).unwrap();
        let expect = -y0 * y0 / (2.0 * (1.0 + 1e-6)) - 0.5 * (1.0f64 + 1e-6).ln() - 0.5 * LN_2PI;
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn lml_matches_dense_oracle() {
        let mut rng = RngState::new(2).stream(Stream::Init);
        for &(n, d) in &[(5usize, 2usize), (20, 3), (50, 4)] {
            let x = uniform_cube(n, d, &mut rng);
            let y: Vec<f64> = x.iter().map(|p| (3.0 * p[0]).sin() + p[1]).collect();
            let h = GpHyper { lengthscale: 0.4, signal_variance: 1.3, noise_variance: 1e-4 };
            let a = log_marginal_likelihood(&x, &y, &h).unwrap();
            let b = dense_lml(&x, &y, &h);
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::Rng as _;
        let mut rng = RngState::new(3).stream(Stream::Init);
        let x = uniform_cube(15, 2, &mut rng);
        let y: Vec<f64> = x.iter().map(|p| (4.0 * p[0]).cos() * p[1] + 0.5).collect();
        for _ in 0..20 {
            let raw = [rng.gen_range(-1.5..0.5), rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0)];
            let (_, g) = lml_with_gradient(&x, &y, raw).unwrap();
            for k in 0..3 {
                let step = 1e-5;
                let (mut p, mut m) = (raw, raw);
                p[k] += step;
                m[k] -= step;
                let fd = (lml_with_gradient(&x, &y, p).unwrap().0 - lml_with_gradient(&x, &y, m).unwrap().0) / (2.0 * step);
                let rel = (g[k] - fd).abs() / fd.abs().max(1e-3);
                assert!(rel < 1e-4, "param {k}: analytic {} fd {fd}", g[k]);
            }
        }
    }

    #[test]
    fn noise_parameterization_is_clamped() {
        for c in [-50.0, -3.0, 0.0, 3.0, 50.0] {
            let h = GpHyper::from_raw([0.0, 0.0, c]);
            assert!((NOISE_MIN..=NOISE_MAX).contains(&h.noise_variance));
        }
        let h = GpHyper { lengthscale: 0.3, signal_variance: 2.0, noise_variance: 3e-5 };
        let back = GpHyper::from_raw(h.to_raw());
        assert!((back.noise_variance - 3e-5).abs() < 1e-15);
        assert!((back.lengthscale - 0.3).abs() < 1e-15);
    }

    #[test]
    fn constant_targets() {
        let mut rng = RngState::new(4).stream(Stream::Init);
        let x = uniform_cube(20, 2, &mut rng);
        for c in [0.0, 2.5, -40.0] {
            let y = vec![c; 20];
            let gp = GpModel::fit(&x, &y).unwrap();
            let q = uniform_cube(50, 2, &mut rng);
            for m in gp.predict_mean(&q) {
                assert!((m - c).abs() < 1e-3 * c.abs().max(1.0), "c={c} m={m}");
            }
        }
    }

    #[test]
    fn fit_improves_on_initialization_and_interpolates() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
        let y: Vec<f64> = x.iter().map(|p| (6.0 * p[0]).sin() + 0.3 * p[0]).collect();
        let init = log_marginal_likelihood(&x, &y, &GpModel::initial_hyper(&x, &y)).unwrap();
        let gp = GpModel::fit(&x, &y).unwrap();
        assert!(gp.log_marginal_likelihood() >= init);
        let h = gp.hyper();
        assert!((NOISE_MIN..=NOISE_MAX).contains(&h.noise_variance));
        let range = 2.3;
        for (m, t) in gp.predict_mean(&x).iter().zip(&y) {
            assert!((m - t).abs() <= 3.0 * h.noise_variance.sqrt() + 1e-3 * range);
        }
    }

    #[test]
    fn held_out_sine_rmse() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 29.0]).collect();
        let f = |t: f64| (2.0 * std::f64::consts::PI * t).sin();
        let y: Vec<f64> = x.iter().map(|p| f(p[0])).collect();
        let gp = GpModel::fit(&x, &y).unwrap();
        let q: Vec<Vec<f64>> = (0..100).map(|i| vec![(i as f64 + 0.5) / 100.0]).collect();
        let mse = gp.predict_mean(&q).iter().zip(&q).map(|(m, p)| (m - f(p[0])).powi(2)).sum::<f64>() / 100.0;
        assert!(mse.sqrt() < 0.05);
    }

    #[test]
    fn far_queries_revert_to_prior() {
        let x = vec![vec![0.1, 0.1], vec![0.2, 0.3], vec![0.4, 0.2]];
        let h = GpHyper { lengthscale: 0.1, signal_variance: 2.0, noise_variance: 1e-6 };
        let gp = GpModel::with_hyper(&x, &[1.0, -2.0, 0.5], h).unwrap();
        let far = vec![vec![4.0, 4.0]];
        assert!(gp.predict_mean(&far)[0].abs() < 1e-9);
        assert!((gp.predict_var(&far)[0] - 2.0).abs() < 1e-9);
        for v in gp.predict_var(&x) {
            assert!(v <= 1e-6 + 1e-8);
        }
    }

    #[test]
    fn covariance_matches_dense_oracle() {
        let x = vec![vec![0.1, 0.5], vec![0.6, 0.2], vec![0.9, 0.9]];
        let h = GpHyper { lengthscale: 0.4, signal_variance: 1.5, noise_variance: 1e-5 };
        let gp = GpModel::with_hyper(&x, &[0.3, -0.2, 1.0], h).unwrap();
        let q = vec![vec![0.2, 0.2], vec![0.5, 0.5], vec![0.8, 0.3]];
        let k = |a: &[f64], b: &[f64]| matern52(sq_dist(a, b).sqrt(), 0.4, 1.5);
        let kxx = DMatrix::from_fn(3, 3, |i, j| k(&x[i], &x[j]) + if i == j { 1e-5 } else { 0.0 });
        let kqx = DMatrix::from_fn(3, 3, |i, j| k(&q[i], &x[j]));
        let kqq = DMatrix::from_fn(3, 3, |i, j| k(&q[i], &q[j]));
        let oracle = &kqq - &kqx * kxx.try_inverse().unwrap() * kqx.transpose();
        let cov = gp.predict_cov(&q);
        assert!((cov - oracle).abs().max() < 1e-8);
        let var = gp.predict_var(&q);
        assert!((var[1] - gp.predict_cov(&q)[(1, 1)]).abs() < 1e-12);
    }

    #[test]
    fn psd_on_random_designs() {
        let mut rng = RngState::new(9).stream(Stream::Init);
        for t in 0..100 {
            let n = 5 + (t * 7) % 196;
            let x = uniform_cube(n, 1 + t % 6, &mut rng);
            let h = GpHyper { lengthscale: 0.2 + 0.01 * t as f64, signal_variance: 1.0, noise_variance: 0.0 };
            let k = kernel_matrix(&x, &h);
            let (_, jitter) = robust_cholesky(&k, 0.0).expect("factorizes");
            assert!(jitter <= 1e-6, "n={n} jitter={jitter}");
        }
    }

    #[test]
    fn posterior_draws() {
        let x = vec![vec![0.1], vec![0.5], vec![0.9]];
        let h = GpHyper { lengthscale: 0.3, signal_variance: 1.0, noise_variance: 1e-6 };
        let gp = GpModel::with_hyper(&x, &[0.2, 1.0, -0.5], h).unwrap();
        let mut rng = RngState::new(1).stream(Stream::Thompson);
        let at_train = gp.sample_posterior(&x, &mut rng).unwrap();
        for (a, b) in at_train.iter().zip([0.2, 1.0, -0.5]) {
            assert!((a - b).abs() < 1e-2);
        }
        let q = vec![vec![0.3], vec![0.7], vec![0.72]];
        let mean = gp.predict_mean(&q);
        let cov = gp.predict_cov(&q);
        let n = 10_000;
        let draws: Vec<Vec<f64>> = (0..n).map(|_| gp.sample_posterior(&q, &mut rng).unwrap()).collect();
        let emp_mean: Vec<f64> = (0..3).map(|j| draws.iter().map(|d| d[j]).sum::<f64>() / n as f64).collect();
        for j in 0..3 {
            let se = (cov[(j, j)] / n as f64).sqrt();
            assert!((emp_mean[j] - mean[j]).abs() < 3.0 * se + 1e-12);
        }
        let emp_cov = DMatrix::from_fn(3, 3, |a, b| {
            draws.iter().map(|d| (d[a] - emp_mean[a]) * (d[b] - emp_mean[b])).sum::<f64>() / (n - 1) as f64
        });
        assert!((&emp_cov - &cov).norm() < 0.1 * cov.norm());
        assert!(gp.sample_posterior(&vec![vec![0.0]; 2001], &mut rng).is_err());
    }

    #[test]
    fn rejects_bad_targets() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(GpModel::fit(&x, &[1.0, f64::NAN]), Err(GpError::NonFiniteTarget { index: 1 })));
        assert!(matches!(GpModel::fit(&x[..1], &[1.0]), Err(GpError::TooFewPoints { .. })));
    }
}
