use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::net::{loss_and_grad, Batch, LossCoefs, LossParts, NetParams};
use super::NeuralError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoHyper {
    pub gamma: f64,
    pub lambda: f64,
    pub clip: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Environment steps per rollout window.
    pub rollout_len: usize,
    /// Global gradient-norm ceiling; `0` disables clipping.
    pub max_grad_norm: f64,
}

impl Default for PpoHyper {
    fn default() -> Self {
        PpoHyper {
            gamma: 0.99,
            lambda: 0.95,
            clip: 0.2,
            learning_rate: 3e-4,
            epochs: 4,
            minibatch: 64,
            entropy_coef: 0.01,
            value_coef: 0.5,
            rollout_len: 256,
            max_grad_norm: 0.5,
        }
    }
}

impl PpoHyper {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::InvalidHyper(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda must be in [0, 1]");
        }
        if self.clip <= 0.0 {
            return bad("clip must be > 0");
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return bad("learning_rate must be > 0");
        }
        if self.epochs == 0 || self.minibatch == 0 || self.rollout_len == 0 {
            return bad("epochs, minibatch and rollout_len must be >= 1");
        }
        Ok(())
    }

    pub fn coefs(&self) -> LossCoefs {
        LossCoefs { clip: self.clip, value: self.value_coef, entropy: self.entropy_coef }
    }
}

/// Adam moment accumulators for one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    m: NetParams,
    v: NetParams,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(like: &NetParams) -> Self {
        Adam { m: like.zeros_like(), v: like.zeros_like(), t: 0 }
    }

    pub fn step(&mut self, params: &mut NetParams, grad: &NetParams, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for (((p, g), m), v) in params.tensors_mut().into_iter().zip(grad.tensors()).zip(ms).zip(vs) {
            for i in 0..p.len() {
                m[i] = Self::BETA1 * m[i] + (1.0 - Self::BETA1) * g[i];
                v[i] = Self::BETA2 * v[i] + (1.0 - Self::BETA2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + Self::EPS);
            }
        }
    }
}

/// A parameter set with its optimiser state.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    pub params: NetParams,
    pub adam: Adam,
}

impl PolicyNet {
    pub fn new(params: NetParams) -> Self {
        let adam = Adam::new(&params);
        PolicyNet { params, adam }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub samples: usize,
    pub minibatches: usize,
    /// Loss parts averaged over minibatches.
    pub loss: LossParts,
}

/// Experience gathered for one update, before advantage normalisation.
#[derive(Clone, Debug, Default)]
pub struct Experience {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Experience {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn extend(&mut self, other: Experience) {
        self.obs.extend(other.obs);
        self.actions.extend(other.actions);
        self.log_probs.extend(other.log_probs);
        self.advantages.extend(other.advantages);
        self.returns.extend(other.returns);
    }

    fn into_batch(self, width: usize) -> Result<Batch, NeuralError> {
        let n = self.obs.len();
        let mut flat = Vec::with_capacity(n * width);
        for o in &self.obs {
            if o.len() != width {
                return Err(NeuralError::ShapeMismatch { expected: width, got: o.len() });
            }
            flat.extend_from_slice(o);
        }
        let obs = Array2::from_shape_vec((n, width), flat).expect("length checked");
        Ok(Batch {
            obs,
            actions: self.actions,
            old_log_probs: self.log_probs,
            advantages: self.advantages,
            returns: self.returns,
        })
    }
}

/// Normalises to mean 0 and variance 1; leaves constant input centred only.
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for x in xs.iter_mut() {
        *x = if std > 1e-12 { (*x - mean) / std } else { *x - mean };
    }
}

/// Several epochs of clipped-surrogate minibatch updates on `exp`.
///
/// On a non-finite loss or gradient the parameters and optimiser state are
/// restored to their values before the call and an error is returned.
pub fn ppo_update<R: Rng + ?Sized>(
    net: &mut PolicyNet,
    mut exp: Experience,
    hyper: &PpoHyper,
    rng: &mut R,
) -> Result<UpdateStats, NeuralError> {
    if exp.is_empty() {
        return Ok(UpdateStats::default());
    }
    normalize(&mut exp.advantages);
    let batch = exp.into_batch(net.params.input_width())?;
    let backup = net.clone();
    let mut stats = UpdateStats { samples: batch.len(), ..UpdateStats::default() };
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let coefs = hyper.coefs();
    for epoch in 0..hyper.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(hyper.minibatch) {
            let mb = batch.select(chunk);
            let (parts, mut grad) = loss_and_grad(&net.params, &mb, coefs)?;
            if !parts.total.is_finite() || !grad.is_finite() {
                *net = backup;
                return Err(NeuralError::NonFinite {
                    epoch,
                    policy_loss: parts.policy,
                    value_loss: parts.value,
                    entropy: parts.entropy,
                });
            }
            if hyper.max_grad_norm > 0.0 {
                let norm = grad.sq_norm().sqrt();
                if norm > hyper.max_grad_norm {
                    grad.scale(hyper.max_grad_norm / norm);
                }
            }
            net.adam.step(&mut net.params, &grad, hyper.learning_rate);
            stats.minibatches += 1;
            stats.loss.total += parts.total;
            stats.loss.policy += parts.policy;
            stats.loss.value += parts.value;
            stats.loss.entropy += parts.entropy;
            stats.loss.approx_kl += parts.approx_kl;
            stats.loss.clip_fraction += parts.clip_fraction;
        }
    }
    if !net.params.is_finite() {
        *net = backup;
        return Err(NeuralError::NonFinite { epoch: hyper.epochs, policy_loss: f64::NAN, value_loss: f64::NAN, entropy: f64::NAN });
    }
    let k = stats.minibatches.max(1) as f64;
    let l = &mut stats.loss;
    for v in [&mut l.total, &mut l.policy, &mut l.value, &mut l.entropy, &mut l.approx_kl, &mut l.clip_fraction] {
        *v /= k;
    }
    Ok(stats)
}
