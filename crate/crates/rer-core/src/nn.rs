//! Minimal fully-connected Q-network: one tanh hidden layer, linear output,
//! MSE loss on the taken actions only, hand-written backpropagation, and
//! plain (uncentered) RMSprop. Everything is f64.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

/// Guard against division by zero in the RMSprop denominator.
pub const RMSPROP_EPSILON: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NnError {
    ShapeMismatch { expected: usize, got: usize },
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
        }
    }
}

/// Weights and biases of the two layers. `w1` is row-major
/// `hidden x obs_dim` (one row per hidden unit), `w2` is row-major
/// `n_actions x hidden`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub obs_dim: usize,
    pub hidden: usize,
    pub n_actions: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl MlpParams {
    /// Weights uniform in +-1/sqrt(fan_in), biases zero.
    pub fn init<R: Rng + ?Sized>(obs_dim: usize, hidden: usize, n_actions: usize, rng: &mut R) -> Self {
        assert!(obs_dim >= 1 && hidden >= 1 && n_actions >= 1);
        let bound1 = 1.0 / libm::sqrt(obs_dim as f64);
        let bound2 = 1.0 / libm::sqrt(hidden as f64);
        MlpParams {
            obs_dim,
            hidden,
            n_actions,
            w1: (0..hidden * obs_dim).map(|_| rng.random_range(-bound1..bound1)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..n_actions * hidden).map(|_| rng.random_range(-bound2..bound2)).collect(),
            b2: vec![0.0; n_actions],
        }
    }

    pub fn zeros(obs_dim: usize, hidden: usize, n_actions: usize) -> Self {
        MlpParams {
            obs_dim,
            hidden,
            n_actions,
            w1: vec![0.0; hidden * obs_dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; n_actions * hidden],
            b2: vec![0.0; n_actions],
        }
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    fn hidden_activations(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        if x.len() != self.obs_dim {
            return Err(NnError::ShapeMismatch { expected: self.obs_dim, got: x.len() });
        }
        Ok((0..self.hidden)
            .map(|j| {
                let row = &self.w1[j * self.obs_dim..(j + 1) * self.obs_dim];
                let pre = self.b1[j] + dot(row, x);
                libm::tanh(pre)
            })
            .collect())
    }

    /// Q-values for one observation.
    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        let h = self.hidden_activations(x)?;
        Ok((0..self.n_actions)
            .map(|a| self.b2[a] + dot(&self.w2[a * self.hidden..(a + 1) * self.hidden], &h))
            .collect())
    }

    /// Q-value matrix for a batch, one output row per input row.
    pub fn forward(&self, xs: &[&[f64]]) -> Result<Vec<Vec<f64>>, NnError> {
        xs.iter().map(|x| self.forward_one(x)).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Parameter-shaped gradient accumulator.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Gradients {
            w1: vec![0.0; params.w1.len()],
            b1: vec![0.0; params.b1.len()],
            w2: vec![0.0; params.w2.len()],
            b2: vec![0.0; params.b2.len()],
        }
    }
}

/// Mean-squared-error loss over the batch, measured only at each sample's
/// taken action; targets are constants (no gradient flows through them).
/// Returns the exact analytic gradients and the loss.
pub fn backward_mse(
    params: &MlpParams,
    obs: &[&[f64]],
    actions: &[usize],
    targets: &[f64],
) -> Result<(Gradients, f64), NnError> {
    if obs.len() != actions.len() || obs.len() != targets.len() || obs.is_empty() {
        return Err(NnError::ShapeMismatch { expected: obs.len(), got: actions.len().max(targets.len()) });
    }
    let mut grads = Gradients::zeros_like(params);
    let scale = 1.0 / obs.len() as f64;
    let mut loss_sum = 0.0;
    for b in 0..obs.len() {
        let x = obs[b];
        let action = actions[b];
        if action >= params.n_actions {
            return Err(NnError::ShapeMismatch { expected: params.n_actions, got: action });
        }
        let h = params.hidden_activations(x)?;
        let q = params.b2[action] + dot(&params.w2[action * params.hidden..(action + 1) * params.hidden], &h);
        let err = q - targets[b];
        loss_sum += err * err;
        let d = 2.0 * err * scale;
        grads.b2[action] += d;
        for (j, &hj) in h.iter().enumerate() {
            grads.w2[action * params.hidden + j] += d * hj;
            let dh = d * params.w2[action * params.hidden + j];
            let dz = dh * (1.0 - hj * hj);
            grads.b1[j] += dz;
            let w1_row = &mut grads.w1[j * params.obs_dim..(j + 1) * params.obs_dim];
            for (g, &xi) in w1_row.iter_mut().zip(x) {
                *g += dz * xi;
            }
        }
    }
    Ok((grads, loss_sum * scale))
}

/// Per-parameter squared-gradient accumulators plus the optimizer
/// hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RmsPropState {
    pub learning_rate: f64,
    pub beta: f64,
    pub epsilon: f64,
    acc_w1: Vec<f64>,
    acc_b1: Vec<f64>,
    acc_w2: Vec<f64>,
    acc_b2: Vec<f64>,
}

impl RmsPropState {
    pub fn new(params: &MlpParams, learning_rate: f64, beta: f64) -> Self {
        assert!((0.0..1.0).contains(&beta), "beta must be in [0, 1)");
        RmsPropState {
            learning_rate,
            beta,
            epsilon: RMSPROP_EPSILON,
            acc_w1: vec![0.0; params.w1.len()],
            acc_b1: vec![0.0; params.b1.len()],
            acc_w2: vec![0.0; params.w2.len()],
            acc_b2: vec![0.0; params.b2.len()],
        }
    }

    /// Max accumulator entry; diagnostic for tests.
    pub fn max_accumulator(&self) -> f64 {
        [&self.acc_w1, &self.acc_b1, &self.acc_w2, &self.acc_b2]
            .iter()
            .flat_map(|v| v.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// One RMSprop update:
/// `acc <- beta * acc + (1 - beta) * g^2`,
/// `p <- p - lr * g / (sqrt(acc) + epsilon)`, element-wise.
pub fn rmsprop_step(params: &mut MlpParams, grads: &Gradients, opt: &mut RmsPropState) {
    step_slice(&mut params.w1, &grads.w1, &mut opt.acc_w1, opt.learning_rate, opt.beta, opt.epsilon);
    step_slice(&mut params.b1, &grads.b1, &mut opt.acc_b1, opt.learning_rate, opt.beta, opt.epsilon);
    step_slice(&mut params.w2, &grads.w2, &mut opt.acc_w2, opt.learning_rate, opt.beta, opt.epsilon);
    step_slice(&mut params.b2, &grads.b2, &mut opt.acc_b2, opt.learning_rate, opt.beta, opt.epsilon);
}

fn step_slice(p: &mut [f64], g: &[f64], acc: &mut [f64], lr: f64, beta: f64, eps: f64) {
    debug_assert!(p.len() == g.len() && g.len() == acc.len());
    for k in 0..p.len() {
        acc[k] = beta * acc[k] + (1.0 - beta) * g[k] * g[k];
        p[k] -= lr * g[k] / (libm::sqrt(acc[k]) + eps);
    }
}
