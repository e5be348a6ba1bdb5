//! Sliced iterative normalizing flow over evaluated points.
//!
//! The flow is a whitening affine map followed by `L` sliced layers. Each
//! layer picks up to 8 orthonormal directions and Gaussianizes the marginal
//! along each one with a KDE-based monotone map, leaving the orthogonal
//! complement untouched. Because the directions are orthonormal, the layer
//! Jacobian determinant is the product of the 1D slopes.

mod directions;
mod transform;

pub use directions::{find_directions, normal_quantiles, w2_to_normal};
pub use transform::{scott_bandwidth, Transform1D, CLIP};

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::FlowError;
use crate::normal::LN_SQRT_2PI;

pub const MAX_DIRECTIONS: usize = 8;
const LATENT_RETRIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    /// Multiplier on Scott's rule bandwidth.
    pub bw: f64,
    pub layers: usize,
    pub max_directions: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { bw: 1.0, layers: 5, max_directions: MAX_DIRECTIONS }
    }
}

#[derive(Clone, Debug)]
pub struct SlicedLayer {
    directions: Vec<Vec<f64>>,
    transforms: Vec<Transform1D>,
}

impl SlicedLayer {
    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn transforms(&self) -> &[Transform1D] {
        &self.transforms
    }

    fn forward_in_place(&self, z: &mut [f64]) -> f64 {
        let mut log_det = 0.0;
        let shifts: Vec<f64> = self
            .directions
            .iter()
            .zip(&self.transforms)
            .map(|(w, tr)| {
                let p = dot(w, z);
                let (q, lj) = tr.forward(p);
                log_det += lj;
                q - p
            })
            .collect();
        for (w, s) in self.directions.iter().zip(shifts) {
            z.iter_mut().zip(w).for_each(|(zi, wi)| *zi += s * wi);
        }
        log_det
    }

    fn inverse_in_place(&self, z: &mut [f64]) -> Result<(), FlowError> {
        let mut shifts = Vec::with_capacity(self.directions.len());
        for (w, tr) in self.directions.iter().zip(&self.transforms) {
            let q = dot(w, z);
            shifts.push(tr.inverse(q)? - q);
        }
        for (w, s) in self.directions.iter().zip(shifts) {
            z.iter_mut().zip(w).for_each(|(zi, wi)| *zi += s * wi);
        }
        Ok(())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Whitening map followed by sliced Gaussianization layers onto a standard
/// normal base.
#[derive(Clone, Debug)]
pub struct Flow {
    mean: DVector<f64>,
    /// Lower Cholesky factor of the ridged covariance.
    chol: DMatrix<f64>,
    chol_inv: DMatrix<f64>,
    whitening_log_det: f64,
    layers: Vec<SlicedLayer>,
}

impl Flow {
    /// The identity map onto a standard normal in `dim` dimensions.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: DVector::zeros(dim),
            chol: DMatrix::identity(dim, dim),
            chol_inv: DMatrix::identity(dim, dim),
            whitening_log_det: 0.0,
            layers: Vec::new(),
        }
    }

    pub fn fit<R: Rng + ?Sized>(points: &[Vec<f64>], config: &FlowConfig, rng: &mut R) -> Result<Self, FlowError> {
        let n = points.len();
        if n < 2 {
            return Err(FlowError::TooFewPoints(n));
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(FlowError::NonFinite(i));
        }
        let d = points[0].len();
        let mean = DVector::from_fn(d, |j, _| points.iter().map(|p| p[j]).sum::<f64>() / n as f64);
        let mut cov = DMatrix::zeros(d, d);
        for p in points {
            let c = DVector::from_column_slice(p) - &mean;
            cov.ger(1.0 / n as f64, &c, &c, 1.0);
        }
        let ridge = (1e-6 * cov.trace() / d as f64).max(1e-12);
        for i in 0..d {
            cov[(i, i)] += ridge;
        }
        let chol = Cholesky::new(cov).ok_or(FlowError::NonFinite(0))?.unpack();
        let chol_inv = chol
            .clone()
            .solve_lower_triangular(&DMatrix::identity(d, d))
            .ok_or(FlowError::NonFinite(0))?;
        let whitening_log_det = -chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let mut flow = Self { mean, chol, chol_inv, whitening_log_det, layers: Vec::with_capacity(config.layers) };

        let mut z: Vec<Vec<f64>> = points.iter().map(|p| flow.whiten(p)).collect();
        let k = config.max_directions.clamp(1, MAX_DIRECTIONS).min(d);
        for _ in 0..config.layers {
            let directions = find_directions(&z, k, rng)?;
            let transforms = directions
                .iter()
                .map(|w| {
                    let proj: Vec<f64> = z.iter().map(|p| dot(p, w)).collect();
                    Transform1D::fit(&proj, config.bw)
                })
                .collect();
            let layer = SlicedLayer { directions, transforms };
            for p in z.iter_mut() {
                layer.forward_in_place(p);
            }
            flow.layers.push(layer);
        }
        Ok(flow)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn layers(&self) -> &[SlicedLayer] {
        &self.layers
    }

    fn whiten(&self, x: &[f64]) -> Vec<f64> {
        let c = DVector::from_column_slice(x) - &self.mean;
        (&self.chol_inv * c).data.into()
    }

    /// Latent point and total log |det ∂z/∂x|.
    pub fn forward_with_log_det(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let mut z = self.whiten(x);
        let mut log_det = self.whitening_log_det;
        for layer in &self.layers {
            log_det += layer.forward_in_place(&mut z);
        }
        (z, log_det)
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_with_log_det(x).0
    }

    pub fn inverse(&self, z: &[f64]) -> Result<Vec<f64>, FlowError> {
        let mut z = z.to_vec();
        for layer in self.layers.iter().rev() {
            layer.inverse_in_place(&mut z)?;
        }
        let x = &self.chol * DVector::from_vec(z) + &self.mean;
        Ok(x.data.into())
    }

    /// `ln q(x) = ln π(Ψ(x)) + ln |det ∂Ψ/∂x|`.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let (z, log_det) = self.forward_with_log_det(x);
        let base: f64 = z.iter().map(|v| -0.5 * v * v - LN_SQRT_2PI).sum();
        base + log_det
    }

    /// Draws `z ~ N(Ψ(center), R² I)` and maps back, clamping into the unit
    /// cube. Draws whose inverse fails are redrawn up to 10 times; points
    /// that never invert are counted in `failed`.
    pub fn sample_latent_ball<R: Rng + ?Sized>(&self, center: &[f64], radius: f64, n: usize, rng: &mut R) -> LatentDraws {
        let z_center = self.forward(center);
        let mut points = Vec::with_capacity(n);
        let mut failed = 0;
        let mut z = vec![0.0; z_center.len()];
        for _ in 0..n {
            let mut accepted = None;
            for _ in 0..=LATENT_RETRIES {
                for (zi, ci) in z.iter_mut().zip(&z_center) {
                    *zi = ci + radius * rng.sample::<f64, _>(StandardNormal);
                }
                if let Ok(x) = self.inverse(&z) {
                    accepted = Some(x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect());
                    break;
                }
            }
            match accepted {
                Some(x) => points.push(x),
                None => failed += 1,
            }
        }
        LatentDraws { points, failed }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LatentDraws {
    pub points: Vec<Vec<f64>>,
    pub failed: usize,
}
