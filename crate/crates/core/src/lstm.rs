//! A tiny single-layer LSTM next-step predictor, trained from scratch.
//!
//! The cell is the standard one (input, forget, candidate and output gates,
//! sigmoid gates, tanh candidate and cell activation) followed by a linear
//! projection of the hidden state to one scalar. Everything is `f64`.
//!
//! Training on a 3-point window `[a, b, c]` is teacher-forced next-step
//! regression: the inputs `[a, b]` are fed through the cell and the outputs
//! at both steps are regressed onto `[b, c]` with mean squared error, using
//! plain full-batch gradient descent. Prediction feeds the whole window and
//! reads the output of the last step.
//!
//! All weights live in a single flat vector:
//!
//! ```text
//! [ w_in (4H) | w_rec (4H x H, row-major) | bias (4H) | w_out (H) | b_out ]
//! ```
//!
//! with gate rows ordered input, forget, candidate, output. Initialization is
//! Glorot-uniform per gate matrix from a seeded ChaCha stream, biases zero
//! except the forget gate (1.0).

use std::fmt::Write as _;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, Error, Result};

/// Number of points the predictor looks back over.
pub const WINDOW: usize = 3;

const GATES: usize = 4;
const GATE_INPUT: usize = 0;
const GATE_FORGET: usize = 1;
const GATE_CANDIDATE: usize = 2;
const GATE_OUTPUT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmHyperparams {
    pub hidden_layers: usize,
    pub hidden_units: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for LstmHyperparams {
    fn default() -> Self {
        Self {
            hidden_layers: 1,
            hidden_units: 10,
            epochs: 50,
            learning_rate: 0.005,
            activation: Activation::Tanh,
            seed: 140,
        }
    }
}

impl LstmHyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers != 1 {
            return Err(Error::InvalidConfig(format!(
                "only one hidden layer is supported, got {}",
                self.hidden_layers
            )));
        }
        if self.hidden_units == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig(
                "hidden_units and epochs must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    hidden: usize,
    params: Vec<f64>,
    pub hyperparams: LstmHyperparams,
}

/// Offsets into the flat parameter vector.
#[derive(Debug, Clone, Copy)]
struct Layout {
    hidden: usize,
}

impl Layout {
    fn rows(self) -> usize {
        GATES * self.hidden
    }
    fn w_in(self) -> usize {
        0
    }
    fn w_rec(self) -> usize {
        self.rows()
    }
    fn bias(self) -> usize {
        self.w_rec() + self.rows() * self.hidden
    }
    fn w_out(self) -> usize {
        self.bias() + self.rows()
    }
    fn b_out(self) -> usize {
        self.w_out() + self.hidden
    }
    fn len(self) -> usize {
        self.b_out() + 1
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-step activations kept for backpropagation.
struct Step {
    x: f64,
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
    y: f64,
}

impl LstmModel {
    /// Freshly initialized (untrained) model.
    pub fn init(hp: LstmHyperparams) -> Result<Self> {
        hp.validate()?;
        let hidden = hp.hidden_units;
        let layout = Layout { hidden };
        let mut params = vec![0.0; layout.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        let glorot = |fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Uniform::new_inclusive(-limit, limit).expect("finite glorot limit")
        };

        let input = glorot(1, hidden);
        for p in &mut params[layout.w_in()..layout.w_rec()] {
            *p = input.sample(&mut rng);
        }
        let recurrent = glorot(hidden, hidden);
        for p in &mut params[layout.w_rec()..layout.bias()] {
            *p = recurrent.sample(&mut rng);
        }
        let output = glorot(hidden, 1);
        for p in &mut params[layout.w_out()..layout.b_out()] {
            *p = output.sample(&mut rng);
        }
        let forget = layout.bias() + GATE_FORGET * hidden;
        params[forget..forget + hidden].fill(1.0);

        Ok(Self {
            hidden,
            params,
            hyperparams: hp,
        })
    }

    /// Builds a model from explicit weights in the flat layout described in
    /// the module docs.
    pub fn from_params(hp: LstmHyperparams, params: Vec<f64>) -> Result<Self> {
        hp.validate()?;
        let layout = Layout {
            hidden: hp.hidden_units,
        };
        if params.len() != layout.len() {
            return Err(Error::LengthMismatch {
                left: params.len(),
                right: layout.len(),
            });
        }
        ensure_finite(&params)?;
        Ok(Self {
            hidden: hp.hidden_units,
            params,
            hyperparams: hp,
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden
    }

    fn layout(&self) -> Layout {
        Layout {
            hidden: self.hidden,
        }
    }

    /// Weights as text, one value per line, in the flat layout order.
    pub fn dump_weights(&self) -> String {
        let mut out = String::with_capacity(self.params.len() * 24);
        for p in &self.params {
            let _ = writeln!(out, "{p:?}");
        }
        out
    }

    fn forward(&self, xs: &[f64]) -> Vec<Step> {
        let l = self.layout();
        let h_n = self.hidden;
        let p = &self.params;
        let mut h = vec![0.0; h_n];
        let mut c = vec![0.0; h_n];
        let mut steps = Vec::with_capacity(xs.len());
        for &x in xs {
            let mut gates = vec![0.0; l.rows()];
            for (r, gate) in gates.iter_mut().enumerate() {
                let rec = &p[l.w_rec() + r * h_n..l.w_rec() + (r + 1) * h_n];
                let z = p[l.w_in() + r] * x
                    + rec.iter().zip(&h).map(|(w, hk)| w * hk).sum::<f64>()
                    + p[l.bias() + r];
                *gate = if r / h_n == GATE_CANDIDATE {
                    z.tanh()
                } else {
                    sigmoid(z)
                };
            }
            let mut tanh_c = vec![0.0; h_n];
            for j in 0..h_n {
                let i = gates[GATE_INPUT * h_n + j];
                let f = gates[GATE_FORGET * h_n + j];
                let g = gates[GATE_CANDIDATE * h_n + j];
                let o = gates[GATE_OUTPUT * h_n + j];
                c[j] = f * c[j] + i * g;
                tanh_c[j] = c[j].tanh();
                h[j] = o * tanh_c[j];
            }
            let y = p[l.w_out()..l.b_out()]
                .iter()
                .zip(&h)
                .map(|(w, hj)| w * hj)
                .sum::<f64>()
                + p[l.b_out()];
            steps.push(Step {
                x,
                gates,
                c: c.clone(),
                tanh_c,
                h: h.clone(),
                y,
            });
        }
        steps
    }

    /// Mean squared error over the supervised steps, and its gradient with
    /// respect to every parameter (backpropagation through time).
    ///
    /// `targets[s]` is the regression target for the output at step `s`;
    /// `None` leaves that step unsupervised.
    pub fn loss_and_gradient(&self, xs: &[f64], targets: &[Option<f64>]) -> (f64, Vec<f64>) {
        debug_assert_eq!(xs.len(), targets.len());
        let l = self.layout();
        let h_n = self.hidden;
        let p = &self.params;
        let steps = self.forward(xs);
        let supervised = targets.iter().flatten().count().max(1) as f64;

        let mut loss = 0.0;
        let mut grad = vec![0.0; p.len()];
        let mut dh_next = vec![0.0; h_n];
        let mut dc_next = vec![0.0; h_n];
        let mut dz = vec![0.0; l.rows()];
        let zeros = vec![0.0; h_n];

        for s in (0..steps.len()).rev() {
            let st = &steps[s];
            let (h_prev, c_prev) = if s == 0 {
                (&zeros, &zeros)
            } else {
                (&steps[s - 1].h, &steps[s - 1].c)
            };
            let dy = match targets[s] {
                Some(target) => {
                    let err = st.y - target;
                    loss += err * err / supervised;
                    2.0 * err / supervised
                }
                None => 0.0,
            };
            grad[l.b_out()] += dy;
            for j in 0..h_n {
                grad[l.w_out() + j] += dy * st.h[j];
            }
            for j in 0..h_n {
                let i = st.gates[GATE_INPUT * h_n + j];
                let f = st.gates[GATE_FORGET * h_n + j];
                let g = st.gates[GATE_CANDIDATE * h_n + j];
                let o = st.gates[GATE_OUTPUT * h_n + j];
                let dh = p[l.w_out() + j] * dy + dh_next[j];
                let dc = dh * o * (1.0 - st.tanh_c[j] * st.tanh_c[j]) + dc_next[j];
                dz[GATE_INPUT * h_n + j] = dc * g * i * (1.0 - i);
                dz[GATE_FORGET * h_n + j] = dc * c_prev[j] * f * (1.0 - f);
                dz[GATE_CANDIDATE * h_n + j] = dc * i * (1.0 - g * g);
                dz[GATE_OUTPUT * h_n + j] = dh * st.tanh_c[j] * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            dh_next.fill(0.0);
            for (r, &d) in dz.iter().enumerate() {
                grad[l.w_in() + r] += d * st.x;
                grad[l.bias() + r] += d;
                let row = l.w_rec() + r * h_n;
                for k in 0..h_n {
                    grad[row + k] += d * h_prev[k];
                    dh_next[k] += p[row + k] * d;
                }
            }
        }
        (loss, grad)
    }

    /// Loss only; used by finite differences.
    pub fn loss(&self, xs: &[f64], targets: &[Option<f64>]) -> f64 {
        let steps = self.forward(xs);
        let supervised = targets.iter().flatten().count().max(1) as f64;
        steps
            .iter()
            .zip(targets)
            .filter_map(|(st, t)| t.map(|t| (st.y - t).powi(2) / supervised))
            .sum()
    }
}

fn check_window(window: &[f64]) -> Result<()> {
    if window.len() != WINDOW {
        return Err(Error::WindowSize {
            expected: WINDOW,
            found: window.len(),
        });
    }
    ensure_finite(window)
}

fn teacher_forced(window: &[f64]) -> (&[f64], [Option<f64>; WINDOW - 1]) {
    (&window[..WINDOW - 1], [Some(window[1]), Some(window[2])])
}

/// A trained model plus the loss seen at the start of every epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LstmModel,
    pub epoch_losses: Vec<f64>,
    pub final_loss: f64,
}

/// Trains a fresh model on one 3-point window and records the loss curve.
pub fn train_with_trace(window: &[f64], hp: LstmHyperparams) -> Result<TrainOutcome> {
    check_window(window)?;
    let mut model = LstmModel::init(hp)?;
    let (xs, targets) = teacher_forced(window);
    let mut epoch_losses = Vec::with_capacity(hp.epochs);
    for epoch in 0..hp.epochs {
        let (loss, grad) = model.loss_and_gradient(xs, &targets);
        epoch_losses.push(loss);
        for (w, g) in model.params.iter_mut().zip(&grad) {
            *w -= hp.learning_rate * g;
        }
        if model.params.iter().any(|w| !w.is_finite()) {
            return Err(Error::DivergedTraining { epoch: epoch + 1 });
        }
    }
    let final_loss = model.loss(xs, &targets);
    Ok(TrainOutcome {
        model,
        epoch_losses,
        final_loss,
    })
}

/// Trains a fresh model on one 3-point window.
pub fn train(window: &[f64], hp: LstmHyperparams) -> Result<LstmModel> {
    train_with_trace(window, hp).map(|o| o.model)
}

/// Runs the whole window through the cell from a zero state and returns the
/// output at the last step.
pub fn predict_next(model: &LstmModel, window: &[f64]) -> Result<f64> {
    check_window(window)?;
    Ok(model.forward(window).last().map(|s| s.y).unwrap_or(0.0))
}

/// Analytic gradient of `(predict_next(window) - target)^2`.
pub fn prediction_gradient(model: &LstmModel, window: &[f64], target: f64) -> Vec<f64> {
    let mut targets = vec![None; window.len()];
    if let Some(last) = targets.last_mut() {
        *last = Some(target);
    }
    model.loss_and_gradient(window, &targets).1
}

/// Central-difference step used by [`gradient_check`].
pub const FD_STEP: f64 = 1e-5;

/// Denominator floor for relative errors, so that parameters whose true
/// gradient is ~0 are judged by absolute error instead.
pub const REL_ERR_FLOOR: f64 = 1e-6;

/// Largest relative error between the analytic gradient of the squared
/// prediction error and central finite differences, over all parameters.
pub fn gradient_check(model: &LstmModel, window: &[f64], target: f64) -> f64 {
    let mut targets = vec![None; window.len()];
    if let Some(last) = targets.last_mut() {
        *last = Some(target);
    }
    let (_, analytic) = model.loss_and_gradient(window, &targets);
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let w = model.params[k];
        probe.params[k] = w + FD_STEP;
        let up = probe.loss(window, &targets);
        probe.params[k] = w - FD_STEP;
        let down = probe.loss(window, &targets);
        probe.params[k] = w;
        let numeric = (up - down) / (2.0 * FD_STEP);
        let denom = a.abs().max(numeric.abs()).max(REL_ERR_FLOOR);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}
