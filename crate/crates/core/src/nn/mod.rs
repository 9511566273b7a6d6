//! Single-hidden-layer perceptron (3 -> H -> 1): tanh hidden units, logistic
//! output, trained full-batch with scaled conjugate gradient.

mod scg;

pub use scg::{select_hidden, train_scg, HiddenSelection};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::N_ATTRIBUTES;
use crate::preprocess::Pattern;

/// Ratio of training patterns to trainable parameters required before training.
pub const CAPACITY_RATIO: usize = 15;

/// Network weights. All parameters act on normalized data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub hidden: usize,
    /// Input-to-hidden weights, `hidden x 3`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Hidden-to-output weights.
    pub w2: Vec<f64>,
    pub b2: f64,
}

pub fn n_params(hidden: usize) -> usize {
    5 * hidden + 1
}

impl MlpModel {
    /// A network of the given size with every parameter set to zero.
    pub fn zeros(hidden: usize) -> Self {
        Self {
            hidden,
            w1: vec![0.0; hidden * N_ATTRIBUTES],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    pub fn n_params(&self) -> usize {
        n_params(self.hidden)
    }

    /// Checks the parameter array lengths against `hidden` and that all values are finite.
    pub fn validate(&self) -> Result<()> {
        let h = self.hidden;
        if h == 0 {
            return Err(Error::InvalidConfig("hidden size must be at least 1".into()));
        }
        if self.w1.len() != h * N_ATTRIBUTES || self.b1.len() != h || self.w2.len() != h {
            return Err(Error::InvalidInput(format!(
                "parameter arrays do not match hidden size {h}"
            )));
        }
        if !self.params().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite network parameter".into()));
        }
        Ok(())
    }

    /// Flattened parameters in the order `w1, b1, w2, b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn from_params(hidden: usize, p: &[f64]) -> Self {
        assert_eq!(p.len(), n_params(hidden), "parameter vector length");
        let h = hidden;
        Self {
            hidden,
            w1: p[..3 * h].to_vec(),
            b1: p[3 * h..4 * h].to_vec(),
            w2: p[4 * h..5 * h].to_vec(),
            b2: p[5 * h],
        }
    }

    pub fn forward(&self, x: &[f64; N_ATTRIBUTES]) -> f64 {
        let mut z = self.b2;
        for j in 0..self.hidden {
            let w = &self.w1[3 * j..3 * j + 3];
            let a = w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + self.b1[j];
            z += self.w2[j] * a.tanh();
        }
        logsig(z)
    }
}

#[inline]
pub fn logsig(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// Network output for a normalized predictor triple.
pub fn forward(model: &MlpModel, x: &[f64; N_ATTRIBUTES]) -> f64 {
    model.forward(x)
}

/// Random initial network: input layer uniform in `±1/sqrt(3)`, output layer
/// in `±1/sqrt(H)`. Deterministic in `(hidden, seed)`.
pub fn init_weights(hidden: usize, seed: u64) -> Result<MlpModel> {
    if hidden < 1 {
        return Err(Error::InvalidConfig("hidden size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_in = 1.0 / (N_ATTRIBUTES as f64).sqrt();
    let r_out = 1.0 / (hidden as f64).sqrt();
    let mut draw = |n: usize, r: f64| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-r..=r)).collect() };
    let w1 = draw(hidden * N_ATTRIBUTES, r_in);
    let b1 = draw(hidden, r_in);
    let w2 = draw(hidden, r_out);
    let b2 = draw(1, r_out)[0];
    Ok(MlpModel {
        hidden,
        w1,
        b1,
        w2,
        b2,
    })
}

/// True when the network has at most one trainable parameter per
/// [`CAPACITY_RATIO`] training patterns.
pub fn check_capacity(hidden: usize, n_train: usize) -> bool {
    CAPACITY_RATIO * n_params(hidden) <= n_train
}

/// Training inputs and targets in struct-of-arrays form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub x: Vec<[f64; N_ATTRIBUTES]>,
    pub y: Vec<f64>,
}

impl Batch {
    pub fn new(x: Vec<[f64; N_ATTRIBUTES]>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput("inputs and targets differ in length".into()));
        }
        Ok(Self { x, y })
    }

    pub fn from_patterns(patterns: &[Pattern]) -> Self {
        Self {
            x: patterns.iter().map(|p| p.x).collect(),
            y: patterns.iter().map(|p| p.y).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Root mean square error of `model` on this batch.
    pub fn rmse(&self, model: &MlpModel) -> f64 {
        (2.0 * loss(&model.params(), model.hidden, self)).sqrt()
    }
}

/// `E = (1/2N) sum (o - y)^2`.
pub(crate) fn loss(p: &[f64], h: usize, batch: &Batch) -> f64 {
    let (w1, rest) = p.split_at(3 * h);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(h);
    let b2 = b2[0];
    let mut sse = 0.0;
    for (x, &y) in batch.x.iter().zip(&batch.y) {
        let mut z = b2;
        for j in 0..h {
            let a = w1[3 * j] * x[0] + w1[3 * j + 1] * x[1] + w1[3 * j + 2] * x[2] + b1[j];
            z += w2[j] * a.tanh();
        }
        let e = logsig(z) - y;
        sse += e * e;
    }
    sse / (2.0 * batch.len() as f64)
}

/// Loss and its gradient, written into `grad` (same layout as the parameters).
pub(crate) fn loss_grad(p: &[f64], h: usize, batch: &Batch, grad: &mut [f64], hid: &mut Vec<f64>) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    hid.clear();
    hid.resize(h, 0.0);
    let (w1, rest) = p.split_at(3 * h);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(h);
    let b2 = b2[0];
    let (g_w1, g_rest) = grad.split_at_mut(3 * h);
    let (g_b1, g_rest) = g_rest.split_at_mut(h);
    let (g_w2, g_b2) = g_rest.split_at_mut(h);
    let mut acc_b2 = 0.0;
    let mut sse = 0.0;
    for (x, &y) in batch.x.iter().zip(&batch.y) {
        let mut z = b2;
        for j in 0..h {
            let a = w1[3 * j] * x[0] + w1[3 * j + 1] * x[1] + w1[3 * j + 2] * x[2] + b1[j];
            let t = a.tanh();
            hid[j] = t;
            z += w2[j] * t;
        }
        let o = logsig(z);
        let e = o - y;
        sse += e * e;
        let d = e * o * (1.0 - o);
        acc_b2 += d;
        for j in 0..h {
            let t = hid[j];
            g_w2[j] += d * t;
            let dh = d * w2[j] * (1.0 - t * t);
            g_w1[3 * j] += dh * x[0];
            g_w1[3 * j + 1] += dh * x[1];
            g_w1[3 * j + 2] += dh * x[2];
            g_b1[j] += dh;
        }
    }
    g_b2[0] = acc_b2;
    let n = batch.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    sse / (2.0 * n)
}

/// Exact gradient of `E = (1/2N) sum (forward(x) - y)^2`, shaped like the model.
pub fn gradient(model: &MlpModel, batch: &Batch) -> Result<MlpModel> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("gradient of an empty batch".into()));
    }
    model.validate()?;
    let mut g = vec![0.0; model.n_params()];
    let mut hid = Vec::new();
    loss_grad(&model.params(), model.hidden, batch, &mut g, &mut hid);
    Ok(MlpModel::from_params(model.hidden, &g))
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ErrMinReached,
    MaxEpoch,
    /// The gradient vanished exactly; no further progress is possible.
    Converged,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::ErrMinReached => "err_min_reached",
            StopReason::MaxEpoch => "max_epoch",
            StopReason::Converged => "converged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epoch: usize,
    /// RMSE threshold, normalized target units.
    pub err_min: f64,
    pub seed: u64,
    pub scg_sigma: f64,
    pub scg_lambda0: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epoch: 2000,
            err_min: 1e-4,
            seed: 0,
            scg_sigma: 5.0e-5,
            scg_lambda0: 5.0e-7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epoch < 1 {
            return Err(Error::InvalidConfig("max_epoch must be at least 1".into()));
        }
        if !(self.err_min >= 0.0) {
            return Err(Error::InvalidConfig("err_min must be non-negative".into()));
        }
        if !(self.scg_sigma > 0.0 && self.scg_lambda0 > 0.0) {
            return Err(Error::InvalidConfig("SCG sigma and lambda0 must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Per-epoch training record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainTrace {
    /// RMSE of the current iterate after each epoch, normalized units.
    pub rmse_history: Vec<f64>,
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    /// Wall time in seconds. Run metadata, not persisted with the model.
    #[serde(skip, default = "unknown_time")]
    pub wall_time: f64,
}

fn unknown_time() -> f64 {
    f64::NAN
}

impl TrainTrace {
    pub fn final_rmse(&self) -> Option<f64> {
        self.rmse_history.last().copied()
    }

    pub fn best_rmse(&self) -> Option<f64> {
        self.rmse_history.iter().copied().reduce(f64::min)
    }
}

// Wall time is excluded: two runs producing the same weights are the same training.
impl PartialEq for TrainTrace {
    fn eq(&self, other: &Self) -> bool {
        self.rmse_history == other.rmse_history
            && self.epochs_run == other.epochs_run
            && self.stop_reason == other.stop_reason
    }
}
