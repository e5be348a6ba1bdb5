//! Benchmark objectives, all posed as maximization problems in domain
//! coordinates.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::domain::BoxDomain;
use crate::error::ConfigError;
use crate::rng::{RngState, Stream};

/// Guards `ln(0)` when the raw minimization value hits its optimum.
pub const EPS_LOG: f64 = 1e-12;

pub type ObjectiveFn = dyn Fn(&[f64]) -> Result<f64, String> + Send + Sync;

/// A black-box maximization target over a box.
#[derive(Clone)]
pub struct Objective {
    name: String,
    domain: BoxDomain,
    func: Arc<ObjectiveFn>,
    known_optimum: Option<(Vec<f64>, f64)>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("known_optimum", &self.known_optimum)
            .finish()
    }
}

impl Objective {
    /// Wraps an infallible function.
    pub fn new<F>(name: impl Into<String>, domain: BoxDomain, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::fallible(name, domain, move |x| Ok(f(x)))
    }

    pub fn fallible<F>(name: impl Into<String>, domain: BoxDomain, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64, String> + Send + Sync + 'static,
    {
        Self { name: name.into(), domain, func: Arc::new(f), known_optimum: None }
    }

    pub fn with_optimum(mut self, theta: Vec<f64>, value: f64) -> Self {
        self.known_optimum = Some((theta, value));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn known_optimum(&self) -> Option<(&[f64], f64)> {
        self.known_optimum.as_ref().map(|(t, v)| (t.as_slice(), *v))
    }

    /// Evaluates at `theta` (domain coordinates). Non-finite results are errors.
    pub fn evaluate(&self, theta: &[f64]) -> Result<f64, String> {
        let v = (self.func)(theta)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("objective returned non-finite value {v}"))
        }
    }
}

/// Standard Ackley function (minimum 0 at the origin).
pub fn ackley_raw(theta: &[f64]) -> f64 {
    let d = theta.len() as f64;
    let sq = theta.iter().map(|t| t * t).sum::<f64>() / d;
    let cs = theta.iter().map(|t| (2.0 * PI * t).cos()).sum::<f64>() / d;
    20.0 + E - 20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp()
}

/// Rastrigin with additive constant `10 d` (minimum 0 at the origin).
pub fn rastrigin_raw(theta: &[f64]) -> f64 {
    10.0 * theta.len() as f64 + theta.iter().map(|t| t * t - 10.0 * (2.0 * PI * t).cos()).sum::<f64>()
}

/// Maps a minimization value to `-ln(g - g* + eps)`: strictly decreasing in
/// `g`, with the optimum mapped to `-ln(eps)`.
pub fn min_to_max(g: f64, g_star: f64, eps_log: f64) -> f64 {
    -(g - g_star + eps_log).ln()
}

/// Rosenbrock as a log-posterior: `-Σ (1-θ_i)² + 100(θ_{i+1}-θ_i²)²` over
/// consecutive pairs. Maximum 0 at all ones.
pub fn rosenbrock_logpost(theta: &[f64]) -> f64 {
    -theta
        .windows(2)
        .map(|w| (1.0 - w[0]).powi(2) + 100.0 * (w[1] - w[0] * w[0]).powi(2))
        .sum::<f64>()
}

/// Zero-mean Gaussian with geometrically spaced eigenvalues and a fixed
/// random rotation.
#[derive(Clone, Debug)]
pub struct CorrelatedGaussian {
    mean: DVector<f64>,
    /// Columns are eigenvectors.
    rotation: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    log_norm: f64,
}

impl CorrelatedGaussian {
    pub const LARGEST_EIGENVALUE: f64 = 0.09;
    pub const CONDITION_NUMBER: f64 = 200.0;
    pub const ROTATION_SEED: u64 = 42;

    pub fn new(dim: usize) -> Self {
        let mut rng = RngState::new(Self::ROTATION_SEED).stream(Stream::Init);
        let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        let rotation = g.qr().q();
        let eigenvalues = DVector::from_fn(dim, |i, _| {
            let frac = if dim > 1 { i as f64 / (dim - 1) as f64 } else { 0.0 };
            Self::LARGEST_EIGENVALUE * Self::CONDITION_NUMBER.powf(-frac)
        });
        let log_det: f64 = eigenvalues.iter().map(|l| l.ln()).sum();
        let log_norm = -0.5 * (dim as f64 * (2.0 * PI).ln() + log_det);
        Self { mean: DVector::from_element(dim, 0.2), rotation, eigenvalues, log_norm }
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    /// Log-density at the mode.
    pub fn max_logpdf(&self) -> f64 {
        self.log_norm
    }

    pub fn logpdf(&self, theta: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(theta) - &self.mean;
        let proj = self.rotation.tr_mul(&diff);
        let maha: f64 = proj.iter().zip(self.eigenvalues.iter()).map(|(p, l)| p * p / l).sum();
        self.log_norm - 0.5 * maha
    }
}

pub const DOUBLE_GAUSS_WEIGHTS: [f64; 2] = [0.3, 0.7];
pub const DOUBLE_GAUSS_CENTERS: [f64; 2] = [0.625, -0.325];
pub const DOUBLE_GAUSS_SIGMA: f64 = 0.1;

/// Log of the two-component isotropic mixture.
pub fn double_gaussian_logpdf(theta: &[f64]) -> f64 {
    let d = theta.len() as f64;
    let var = DOUBLE_GAUSS_SIGMA * DOUBLE_GAUSS_SIGMA;
    let log_norm = -0.5 * d * (2.0 * PI * var).ln();
    let terms: Vec<f64> = DOUBLE_GAUSS_WEIGHTS
        .iter()
        .zip(DOUBLE_GAUSS_CENTERS)
        .map(|(w, c)| {
            let sq: f64 = theta.iter().map(|t| (t - c) * (t - c)).sum();
            w.ln() + log_norm - 0.5 * sq / var
        })
        .collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

pub fn ackley(dim: usize) -> Objective {
    let domain = BoxDomain::cube(dim, -5.0, 10.0).expect("static domain");
    let f = |x: &[f64]| min_to_max(ackley_raw(x), 0.0, EPS_LOG);
    let peak = f(&vec![0.0; dim]);
    Objective::new(format!("ackley{dim}"), domain, f).with_optimum(vec![0.0; dim], peak)
}

pub fn rastrigin(dim: usize) -> Objective {
    let domain = BoxDomain::cube(dim, -5.12, 5.12).expect("static domain");
    let f = |x: &[f64]| min_to_max(rastrigin_raw(x), 0.0, EPS_LOG);
    let peak = f(&vec![0.0; dim]);
    Objective::new(format!("rastrigin{dim}"), domain, f).with_optimum(vec![0.0; dim], peak)
}

pub fn correlated_gaussian(dim: usize) -> Objective {
    let g = CorrelatedGaussian::new(dim);
    let (mean, peak) = (g.mean().to_vec(), g.max_logpdf());
    let domain = BoxDomain::cube(dim, -2.0, 2.0).expect("static domain");
    Objective::new(format!("corrgauss{dim}"), domain, move |x| g.logpdf(x)).with_optimum(mean, peak)
}

pub fn double_gaussian(dim: usize) -> Objective {
    let domain = BoxDomain::cube(dim, -2.0, 2.0).expect("static domain");
    let peak = vec![DOUBLE_GAUSS_CENTERS[1]; dim];
    let value = double_gaussian_logpdf(&peak);
    Objective::new(format!("doublegauss{dim}"), domain, double_gaussian_logpdf).with_optimum(peak, value)
}

pub fn rosenbrock(dim: usize) -> Objective {
    let domain = BoxDomain::cube(dim, -5.0, 5.0).expect("static domain");
    Objective::new(format!("rosenbrock{dim}"), domain, rosenbrock_logpost).with_optimum(vec![1.0; dim], 0.0)
}

/// Resolves a string id. Fixed-dimension ids (`ackley10`, `corrgauss10`, ...)
/// reject a conflicting `dim`; `ackley-d` and `rastrigin-d` require one.
pub fn by_id(id: &str, dim: Option<usize>) -> Result<Objective, ConfigError> {
    let unknown = || ConfigError::UnknownObjective(id.to_string());
    let (family, suffix) = id.find(|c: char| c.is_ascii_digit() || c == '-').map_or((id, ""), |i| id.split_at(i));
    let fixed = match suffix {
        "-d" => None,
        s => Some(s.parse::<usize>().map_err(|_| unknown())?),
    };
    let d = match (fixed, dim) {
        (Some(f), Some(g)) if f != g => {
            return Err(ConfigError::Invalid { flag: "--dim", message: format!("objective `{id}` is {f}-dimensional, got {g}") })
        }
        (Some(f), _) => f,
        (None, Some(g)) => g,
        (None, None) => {
            return Err(ConfigError::Invalid { flag: "--dim", message: format!("objective `{id}` needs --dim") })
        }
    };
    if d == 0 {
        return Err(ConfigError::Invalid { flag: "--dim", message: "dimension must be >= 1".into() });
    }
    let parametric = matches!(family, "ackley" | "rastrigin");
    if !parametric && (fixed != Some(10)) {
        return Err(unknown());
    }
    Ok(match family {
        "ackley" => ackley(d),
        "rastrigin" => rastrigin(d),
        "corrgauss" => correlated_gaussian(d),
        "doublegauss" => double_gaussian(d),
        "rosenbrock" => rosenbrock(d),
        _ => return Err(unknown()),
    })
}
