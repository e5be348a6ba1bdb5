//! Fully connected tanh regression network used as a drop-in surrogate mean.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::MlpError;

#[derive(Clone, Debug, PartialEq)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self { hidden: vec![100, 100], epochs: 500, learning_rate: 1e-3 }
    }
}

#[derive(Clone, Debug)]
struct Dense {
    /// out × in
    w: DMatrix<f64>,
    b: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct MlpModel {
    layers: Vec<Dense>,
    final_loss: f64,
    initial_loss: f64,
}

fn to_columns(x: &[Vec<f64>]) -> DMatrix<f64> {
    let d = x.first().map_or(0, |p| p.len());
    DMatrix::from_fn(d, x.len(), |i, j| x[j][i])
}

impl MlpModel {
    /// Xavier-uniform weights and zero hidden biases; the output bias starts
    /// at `output_bias`.
    fn init<R: Rng + ?Sized>(input: usize, hidden: &[usize], output_bias: f64, rng: &mut R) -> Self {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let layers = widths
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Dense { w: DMatrix::from_fn(w[1], w[0], |_, _| rng.gen_range(-limit..limit)), b: DVector::zeros(w[1]) }
            })
            .collect::<Vec<_>>();
        let mut model = Self { layers, final_loss: f64::NAN, initial_loss: f64::NAN };
        let last = model.layers.len() - 1;
        model.layers[last].b[0] = output_bias;
        model
    }

    /// Builds a network with every weight and bias zero except the output
    /// bias.
    pub fn zeros(input: usize, hidden: &[usize], output_bias: f64) -> Self {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let mut layers: Vec<Dense> =
            widths.windows(2).map(|w| Dense { w: DMatrix::zeros(w[1], w[0]), b: DVector::zeros(w[1]) }).collect();
        let last = layers.len() - 1;
        layers[last].b[0] = output_bias;
        Self { layers, final_loss: f64::NAN, initial_loss: f64::NAN }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Activations of every layer for a batch (columns are samples).
    fn activations(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut a = &layer.w * acts.last().expect("input present");
            for mut col in a.column_iter_mut() {
                col += &layer.b;
            }
            if i + 1 < self.layers.len() {
                a.apply(|v| *v = v.tanh());
            }
            acts.push(a);
        }
        acts
    }

    /// Mean squared error and its gradient (same layout as the layers).
    fn loss_and_grad(&self, x: &DMatrix<f64>, y: &DVector<f64>) -> (f64, Vec<Dense>) {
        let n = y.len() as f64;
        let acts = self.activations(x);
        let out = acts.last().expect("output present");
        let resid = DMatrix::from_fn(1, y.len(), |_, j| out[(0, j)] - y[j]);
        let loss = resid.norm_squared() / n;
        let mut delta = resid * (2.0 / n);
        let mut grads = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &acts[i];
            let gw = &delta * input.transpose();
            let gb = DVector::from_iterator(delta.nrows(), delta.row_iter().map(|r| r.sum()));
            grads.push(Dense { w: gw, b: gb });
            if i > 0 {
                let mut back = layer.w.tr_mul(&delta);
                back.zip_apply(input, |g, h| *g *= 1.0 - h * h);
                delta = back;
            }
        }
        grads.reverse();
        (loss, grads)
    }

    pub fn fit<R: Rng + ?Sized>(x: &[Vec<f64>], y: &[f64], config: &MlpConfig, rng: &mut R) -> Result<Self, MlpError> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(MlpError::TooFewPoints(x.len().min(y.len())));
        }
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let mut model = Self::init(x[0].len(), &config.hidden, mean, rng);
        let xm = to_columns(x);
        let yv = DVector::from_column_slice(y);
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let mut m: Vec<Dense> = model.layers.iter().map(|l| Dense { w: l.w.map(|_| 0.0), b: l.b.map(|_| 0.0) }).collect();
        let mut v = m.clone();
        let mut best: Option<(f64, Vec<Dense>)> = None;
        let mut initial = f64::NAN;
        for epoch in 0..=config.epochs {
            let (loss, grads) = model.loss_and_grad(&xm, &yv);
            if !loss.is_finite() {
                return Err(MlpError::NonFiniteLoss { epoch });
            }
            if epoch == 0 {
                initial = loss;
            }
            if best.as_ref().map_or(true, |(b, _)| loss < *b) {
                best = Some((loss, model.layers.clone()));
            }
            if epoch == config.epochs {
                break;
            }
            let t = (epoch + 1) as i32;
            let (c1, c2) = (1.0 - f64::powi(b1, t), 1.0 - f64::powi(b2, t));
            for ((layer, g), (ml, vl)) in model.layers.iter_mut().zip(&grads).zip(m.iter_mut().zip(v.iter_mut())) {
                adam_update(layer.w.as_mut_slice(), g.w.as_slice(), ml.w.as_mut_slice(), vl.w.as_mut_slice(), config.learning_rate, c1, c2, eps);
                adam_update(layer.b.as_mut_slice(), g.b.as_slice(), ml.b.as_mut_slice(), vl.b.as_mut_slice(), config.learning_rate, c1, c2, eps);
            }
        }
        let (loss, layers) = best.expect("at least one epoch evaluated");
        model.layers = layers;
        model.final_loss = loss;
        model.initial_loss = initial;
        Ok(model)
    }

    pub fn training_loss(&self) -> f64 {
        self.final_loss
    }

    pub fn initial_loss(&self) -> f64 {
        self.initial_loss
    }

    pub fn predict(&self, q: &[Vec<f64>]) -> Vec<f64> {
        if q.is_empty() {
            return Vec::new();
        }
        let acts = self.activations(&to_columns(q));
        acts.last().expect("output present").iter().copied().collect()
    }

    /// Flattened parameters, layer by layer (weights column-major, then bias).
    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()).copied().collect::<Vec<_>>()).collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut it = p.iter();
        for l in &mut self.layers {
            l.w.iter_mut().chain(l.b.iter_mut()).for_each(|v| *v = *it.next().expect("parameter count"));
        }
    }

    /// MSE loss and its flattened gradient at the current parameters.
    pub fn loss_gradient(&self, x: &[Vec<f64>], y: &[f64]) -> (f64, Vec<f64>) {
        let (loss, grads) = self.loss_and_grad(&to_columns(x), &DVector::from_column_slice(y));
        (loss, grads.iter().flat_map(|g| g.w.iter().chain(g.b.iter()).copied().collect::<Vec<_>>()).collect())
    }

    /// Random Xavier-initialized network (for gradient checks and benchmarks).
    pub fn random<R: Rng + ?Sized>(input: usize, hidden: &[usize], rng: &mut R) -> Self {
        let mut m = Self::init(input, hidden, 0.0, rng);
        for l in &mut m.layers {
            l.b.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        }
        m
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_update(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], lr: f64, c1: f64, c2: f64, eps: f64) {
    for i in 0..p.len() {
        m[i] = 0.9 * m[i] + 0.1 * g[i];
        v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
    }
}
