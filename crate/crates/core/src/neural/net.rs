use ndarray::{Array1, Array2, ArrayView1, Axis, Zip};
use rand::Rng;
use rand_distr::StandardNormal;

use super::NeuralError;

/// One-hidden-layer actor-critic: a shared tanh trunk feeding a categorical
/// policy head and a scalar value head.
#[derive(Clone, Debug, PartialEq)]
pub struct NetParams {
    /// `hidden x input`
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    /// `actions x hidden`
    pub wp: Array2<f64>,
    pub bp: Array1<f64>,
    pub wv: Array1<f64>,
    /// Length 1.
    pub bv: Array1<f64>,
}

/// Initialisation gains of the three layers.
#[derive(Clone, Copy, Debug)]
pub struct InitGains {
    pub trunk: f64,
    pub policy: f64,
    pub value: f64,
}

impl Default for InitGains {
    fn default() -> Self {
        InitGains { trunk: std::f64::consts::SQRT_2, policy: 0.01, value: 1.0 }
    }
}

fn scaled_normal<R: Rng>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Array2<f64> {
    let std = gain / (cols.max(1) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || std * rng.sample::<f64, _>(StandardNormal))
}

impl NetParams {
    pub fn zeros(input: usize, hidden: usize, actions: usize) -> Self {
        NetParams {
            w1: Array2::zeros((hidden, input)),
            b1: Array1::zeros(hidden),
            wp: Array2::zeros((actions, hidden)),
            bp: Array1::zeros(actions),
            wv: Array1::zeros(hidden),
            bv: Array1::zeros(1),
        }
    }

    /// Fan-in scaled Gaussian weights, zero biases.
    pub fn random<R: Rng>(input: usize, hidden: usize, actions: usize, gains: InitGains, rng: &mut R) -> Self {
        let mut p = Self::zeros(input, hidden, actions);
        p.w1 = scaled_normal(hidden, input, gains.trunk, rng);
        p.wp = scaled_normal(actions, hidden, gains.policy, rng);
        p.wv = scaled_normal(1, hidden, gains.value, rng).row(0).to_owned();
        p
    }

    pub fn input_width(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden_width(&self) -> usize {
        self.w1.nrows()
    }

    pub fn action_count(&self) -> usize {
        self.wp.nrows()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_width(), self.hidden_width(), self.action_count())
    }

    /// Every tensor as a flat slice, in a fixed order.
    pub fn tensors(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.wp.as_slice().expect("standard layout"),
            self.bp.as_slice().expect("standard layout"),
            self.wv.as_slice().expect("standard layout"),
            self.bv.as_slice().expect("standard layout"),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.wp.as_slice_mut().expect("standard layout"),
            self.bp.as_slice_mut().expect("standard layout"),
            self.wv.as_slice_mut().expect("standard layout"),
            self.bv.as_slice_mut().expect("standard layout"),
        ]
    }

    pub const TENSOR_NAMES: [&'static str; 6] = ["w1", "b1", "wp", "bp", "wv", "bv"];

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn sq_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.iter()).map(|v| v * v).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Policy logits and value estimate for one observation.
    pub fn forward(&self, obs: &[f64]) -> Result<(Vec<f64>, f64), NeuralError> {
        if obs.len() != self.input_width() {
            return Err(NeuralError::ShapeMismatch { expected: self.input_width(), got: obs.len() });
        }
        let x = ArrayView1::from(obs);
        let mut h = self.w1.dot(&x);
        Zip::from(&mut h).and(&self.b1).for_each(|h, &b| *h = (*h + b).tanh());
        let logits = self.wp.dot(&h) + &self.bp;
        let value = self.wv.dot(&h) + self.bv[0];
        Ok((logits.to_vec(), value))
    }

    /// Value estimate only.
    pub fn value(&self, obs: &[f64]) -> Result<f64, NeuralError> {
        if obs.len() != self.input_width() {
            return Err(NeuralError::ShapeMismatch { expected: self.input_width(), got: obs.len() });
        }
        let x = ArrayView1::from(obs);
        let mut h = self.w1.dot(&x);
        Zip::from(&mut h).and(&self.b1).for_each(|h, &b| *h = (*h + b).tanh());
        Ok(self.wv.dot(&h) + self.bv[0])
    }
}

/// A minibatch of experience for the surrogate objective.
#[derive(Clone, Debug)]
pub struct Batch {
    /// `batch x input`
    pub obs: Array2<f64>,
    pub actions: Vec<usize>,
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Batch {
        Batch {
            obs: self.obs.select(Axis(0), idx),
            actions: idx.iter().map(|&i| self.actions[i]).collect(),
            old_log_probs: idx.iter().map(|&i| self.old_log_probs[i]).collect(),
            advantages: idx.iter().map(|&i| self.advantages[i]).collect(),
            returns: idx.iter().map(|&i| self.returns[i]).collect(),
        }
    }
}

/// Coefficients of the PPO loss.
#[derive(Clone, Copy, Debug)]
pub struct LossCoefs {
    pub clip: f64,
    pub value: f64,
    pub entropy: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// PPO loss (to be minimised) and its exact gradient.
///
/// `loss = -mean(min(r*A, clip(r, 1-eps, 1+eps)*A)) + c_v*mean((V-R)^2) - c_e*mean(H)`
/// with `r = exp(log pi(a|s) - log pi_old(a|s))`.
pub fn loss_and_grad(p: &NetParams, batch: &Batch, coefs: LossCoefs) -> Result<(LossParts, NetParams), NeuralError> {
    let b = batch.len();
    if b == 0 {
        return Ok((LossParts::default(), p.zeros_like()));
    }
    if batch.obs.ncols() != p.input_width() {
        return Err(NeuralError::ShapeMismatch { expected: p.input_width(), got: batch.obs.ncols() });
    }
    let n_act = p.action_count();
    if let Some(&a) = batch.actions.iter().find(|&&a| a >= n_act) {
        return Err(NeuralError::ShapeMismatch { expected: n_act, got: a + 1 });
    }
    let inv_b = 1.0 / b as f64;

    let mut hidden = batch.obs.dot(&p.w1.t());
    hidden += &p.b1;
    hidden.mapv_inplace(f64::tanh);
    let mut logits = hidden.dot(&p.wp.t());
    logits += &p.bp;
    let values = hidden.dot(&p.wv) + p.bv[0];

    let mut parts = LossParts::default();
    // Reuse the logits buffer for d loss / d logits.
    let mut d_logits = logits;
    let mut d_values = Array1::<f64>::zeros(b);
    for (i, mut row) in d_logits.axis_iter_mut(Axis(0)).enumerate() {
        let a = batch.actions[i];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Shift in place; H = log_sum - sum_j pi_j * shifted_j.
        let (mut sum, mut weighted) = (0.0, 0.0);
        row.iter_mut().for_each(|l| {
            *l -= max;
            let e = l.exp();
            sum += e;
            weighted += e * *l;
        });
        let log_sum = sum.ln();
        let entropy = log_sum - weighted / sum;
        row.iter_mut().for_each(|q| *q -= log_sum);
        let logp = row[a];
        let adv = batch.advantages[i];
        let log_ratio = logp - batch.old_log_probs[i];
        let ratio = log_ratio.exp();
        let clipped = ratio.clamp(1.0 - coefs.clip, 1.0 + coefs.clip);
        let unclipped_obj = ratio * adv;
        let clipped_obj = clipped * adv;
        let surrogate_active = unclipped_obj <= clipped_obj;
        parts.policy -= unclipped_obj.min(clipped_obj) * inv_b;
        parts.entropy += entropy * inv_b;
        parts.approx_kl += ((ratio - 1.0) - log_ratio) * inv_b;
        if (ratio - 1.0).abs() > coefs.clip {
            parts.clip_fraction += inv_b;
        }
        let err = values[i] - batch.returns[i];
        parts.value += err * err * inv_b;
        d_values[i] = 2.0 * coefs.value * err * inv_b;

        // d/dlogit_j of -c_e*H = c_e * pi_j * (log pi_j + H)
        let pg = if surrogate_active { -ratio * adv * inv_b } else { 0.0 };
        let ce = coefs.entropy * inv_b;
        row.iter_mut().enumerate().for_each(|(j, q)| {
            let log_pi = *q;
            let pi = log_pi.exp();
            let ent = if pi > 0.0 { ce * pi * (log_pi + entropy) } else { 0.0 };
            *q = ent + pg * (if j == a { 1.0 } else { 0.0 } - pi);
        });
    }
    parts.total = parts.policy + coefs.value * parts.value - coefs.entropy * parts.entropy;

    let mut d_hidden = d_logits.dot(&p.wp);
    Zip::from(d_hidden.rows_mut()).and(&d_values).for_each(|mut row, &dv| row.scaled_add(dv, &p.wv));
    Zip::from(&mut d_hidden).and(&hidden).for_each(|d, &h| *d *= 1.0 - h * h);
    let g = NetParams {
        w1: d_hidden.t().dot(&batch.obs),
        b1: d_hidden.sum_axis(Axis(0)),
        wp: d_logits.t().dot(&hidden),
        bp: d_logits.sum_axis(Axis(0)),
        wv: hidden.t().dot(&d_values),
        bv: Array1::from_elem(1, d_values.sum()),
    };
    Ok((parts, g))
}
