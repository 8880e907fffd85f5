//! A single-layer LSTM regressor written out by hand: scalar input, hidden
//! size H, linear head on the last hidden state, trained by full-batch
//! gradient descent on mean squared error with gradient-norm clipping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub window: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            window: 4,
            hidden: 16,
            learning_rate: 0.05,
            epochs: 500,
            clip_norm: 1.0,
            seed: 0,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.hidden == 0 {
            return Err(Error::Parameter("LSTM window and hidden size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.clip_norm > 0.0) {
            return Err(Error::Parameter("LSTM learning rate and clip norm must be positive".into()));
        }
        Ok(())
    }
}

/// Maps the history range onto [-1, 1]; a constant history maps to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub center: f64,
    pub half_range: f64,
}

impl Scaler {
    pub fn fit(values: &[f64]) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let half = (hi - lo) / 2.0;
        Scaler {
            center: (hi + lo) / 2.0,
            half_range: if half > 0.0 { half } else { 1.0 },
        }
    }

    pub fn scale(&self, x: f64) -> f64 {
        (x - self.center) / self.half_range
    }

    pub fn unscale(&self, x: f64) -> f64 {
        x * self.half_range + self.center
    }
}

/// Parameter layout inside the flat vector, gates ordered input, forget,
/// output, candidate:
/// `w_x[4H] | w_h[4H×H] row-major | b[4H] | w_out[H] | b_out`.
#[derive(Debug, Clone, Copy)]
struct Layout {
    h: usize,
}

impl Layout {
    fn wx(&self) -> usize {
        0
    }
    fn wh(&self) -> usize {
        4 * self.h
    }
    fn b(&self) -> usize {
        4 * self.h + 4 * self.h * self.h
    }
    fn wout(&self) -> usize {
        self.b() + 4 * self.h
    }
    fn bout(&self) -> usize {
        self.wout() + self.h
    }
    fn len(&self) -> usize {
        self.bout() + 1
    }
}

pub type Sample = (Vec<f64>, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    pub config: LstmConfig,
    pub params: Vec<f64>,
    pub scaler: Scaler,
    /// Training loss before each update, then the loss after the last one.
    pub loss_history: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Step {
    x: f64,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    gates: Vec<f64>, // activated i, f, o, g
    c: Vec<f64>,
}

impl LstmModel {
    /// Uniform(−1/√H, 1/√H) weights, forget-gate bias +1, zero head bias.
    pub fn init(config: LstmConfig) -> Self {
        let lay = Layout { h: config.hidden };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bound = 1.0 / (config.hidden as f64).sqrt();
        let mut params: Vec<f64> = (0..lay.len()).map(|_| rng.gen_range(-bound..bound)).collect();
        for k in 0..config.hidden {
            params[lay.b() + config.hidden + k] = 1.0;
        }
        params[lay.bout()] = 0.0;
        LstmModel {
            config,
            params,
            scaler: Scaler { center: 0.0, half_range: 1.0 },
            loss_history: Vec::new(),
        }
    }

    /// A model with every parameter zero.
    pub fn zeros(config: LstmConfig) -> Self {
        let mut m = Self::init(config);
        m.params.iter_mut().for_each(|p| *p = 0.0);
        m
    }

    pub fn n_params(&self) -> usize {
        Layout { h: self.config.hidden }.len()
    }

    fn forward(&self, params: &[f64], window: &[f64]) -> (f64, Vec<Step>) {
        let h = self.config.hidden;
        let lay = Layout { h };
        let mut hs = vec![0.0; h];
        let mut cs = vec![0.0; h];
        let mut steps = Vec::with_capacity(window.len());
        for &x in window {
            let mut gates = vec![0.0; 4 * h];
            for r in 0..4 * h {
                let row = &params[lay.wh() + r * h..lay.wh() + (r + 1) * h];
                let z = params[lay.wx() + r] * x
                    + row.iter().zip(&hs).map(|(w, v)| w * v).sum::<f64>()
                    + params[lay.b() + r];
                gates[r] = if r < 3 * h { sigmoid(z) } else { z.tanh() };
            }
            let mut c = vec![0.0; h];
            let mut hn = vec![0.0; h];
            for k in 0..h {
                let (i, f, o, g) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
                c[k] = f * cs[k] + i * g;
                hn[k] = o * c[k].tanh();
            }
            steps.push(Step { x, h_prev: hs, c_prev: cs.clone(), gates, c: c.clone() });
            hs = hn;
            cs = c;
        }
        let y = params[lay.wout()..lay.wout() + h]
            .iter()
            .zip(&hs)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + params[lay.bout()];
        (y, steps)
    }

    pub fn predict(&self, window: &[f64]) -> f64 {
        self.forward(&self.params, window).0
    }

    pub(crate) fn loss_at(&self, params: &[f64], batch: &[Sample], scale: f64) -> f64 {
        let n = batch.len().max(1) as f64;
        scale * batch.iter().map(|(w, t)| (self.forward(params, w).0 - t).powi(2)).sum::<f64>() / n
    }

    /// `scale` × mean squared error over `batch`.
    pub fn loss(&self, batch: &[Sample], scale: f64) -> f64 {
        self.loss_at(&self.params, batch, scale)
    }

    /// Loss and its gradient by backpropagation through time.
    pub fn loss_and_gradient(&self, batch: &[Sample], scale: f64) -> (f64, Vec<f64>) {
        let h = self.config.hidden;
        let lay = Layout { h };
        let p = &self.params;
        let mut grad = vec![0.0; lay.len()];
        let n = batch.len().max(1) as f64;
        let mut loss = 0.0;
        for (window, target) in batch {
            let (y, steps) = self.forward(p, window);
            let err = y - target;
            loss += err * err;
            let dy = scale * 2.0 * err / n;
            let h_last: Vec<f64> = steps.last().map_or_else(
                || vec![0.0; h],
                |s| (0..h).map(|k| s.gates[2 * h + k] * s.c[k].tanh()).collect(),
            );
            for k in 0..h {
                grad[lay.wout() + k] += dy * h_last[k];
            }
            grad[lay.bout()] += dy;
            let mut dh: Vec<f64> = (0..h).map(|k| dy * p[lay.wout() + k]).collect();
            let mut dc = vec![0.0; h];
            for s in steps.iter().rev() {
                let mut dz = vec![0.0; 4 * h];
                for k in 0..h {
                    let (i, f, o, g) = (s.gates[k], s.gates[h + k], s.gates[2 * h + k], s.gates[3 * h + k]);
                    let tc = s.c[k].tanh();
                    let d_o = dh[k] * tc;
                    let dck = dc[k] + dh[k] * o * (1.0 - tc * tc);
                    dz[k] = dck * g * i * (1.0 - i);
                    dz[h + k] = dck * s.c_prev[k] * f * (1.0 - f);
                    dz[2 * h + k] = d_o * o * (1.0 - o);
                    dz[3 * h + k] = dck * i * (1.0 - g * g);
                    dc[k] = dck * f;
                }
                let mut dh_prev = vec![0.0; h];
                for r in 0..4 * h {
                    grad[lay.wx() + r] += dz[r] * s.x;
                    grad[lay.b() + r] += dz[r];
                    let base = lay.wh() + r * h;
                    for k in 0..h {
                        grad[base + k] += dz[r] * s.h_prev[k];
                        dh_prev[k] += p[base + k] * dz[r];
                    }
                }
                dh = dh_prev;
            }
        }
        (scale * loss / n, grad)
    }

    /// Largest relative difference between the analytic gradient and central
    /// finite differences (step 1e-5). Relative error is
    /// `|a − n| / max(|a| + |n|, 1e-8)`, so parameters whose true gradient is
    /// zero compare on absolute error.
    pub fn gradient_check(&self, batch: &[Sample], scale: f64) -> f64 {
        const STEP: f64 = 1e-5;
        let (_, analytic) = self.loss_and_gradient(batch, scale);
        let mut p = self.params.clone();
        let mut worst: f64 = 0.0;
        for k in 0..p.len() {
            let orig = p[k];
            p[k] = orig + STEP;
            let up = self.loss_at(&p, batch, scale);
            p[k] = orig - STEP;
            let down = self.loss_at(&p, batch, scale);
            p[k] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let rel = (analytic[k] - numeric).abs() / (analytic[k].abs() + numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        worst
    }
}

/// Sliding windows of length `window` predicting the next value.
pub fn windows(values: &[f64], window: usize) -> Vec<Sample> {
    if values.len() <= window {
        return Vec::new();
    }
    (0..values.len() - window)
        .map(|k| (values[k..k + window].to_vec(), values[k + window]))
        .collect()
}

/// Trains on a raw series (scaled internally). Needs at least window + 2 values.
pub fn train_lstm(values: &[f64], config: &LstmConfig) -> Result<LstmModel> {
    config.validate()?;
    let needed = config.window + 2;
    if values.len() < needed {
        return Err(Error::SeriesTooShort { needed, got: values.len() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("LSTM training series contains a non-finite value".into()));
    }
    let scaler = Scaler::fit(values);
    let scaled: Vec<f64> = values.iter().map(|v| scaler.scale(*v)).collect();
    let batch = windows(&scaled, config.window);
    let mut model = LstmModel::init(*config);
    model.scaler = scaler;
    let mut history = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        let (loss, mut grad) = model.loss_and_gradient(&batch, 1.0);
        history.push(loss);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > config.clip_norm {
            let s = config.clip_norm / norm;
            grad.iter_mut().for_each(|g| *g *= s);
        }
        for (p, g) in model.params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
    }
    history.push(model.loss(&batch, 1.0));
    if model.params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Internal("LSTM training diverged to non-finite parameters".into()));
    }
    model.loss_history = history;
    Ok(model)
}

/// Autoregressive rollout from the last `window` history values; outputs are
/// in original units, optionally clamped to `bounds`.
pub fn forecast_lstm(model: &LstmModel, history: &[f64], horizon: usize, bounds: Option<(f64, f64)>) -> Result<Vec<f64>> {
    let w = model.config.window;
    if history.len() < w {
        return Err(Error::SeriesTooShort { needed: w, got: history.len() });
    }
    let mut window: Vec<f64> = history[history.len() - w..].iter().map(|v| model.scaler.scale(*v)).collect();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let next = model.predict(&window);
        window.remove(0);
        window.push(next);
        let y = model.scaler.unscale(next);
        out.push(bounds.map_or(y, |(lo, hi)| y.clamp(lo, hi)));
    }
    Ok(out)
}
