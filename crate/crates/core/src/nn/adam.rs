use ndarray::Zip;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, LayerParams};
use crate::scalar::Scalar;

/// Optimizer and model-shape settings for one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Coupled L2 by default (decay folded into the weight gradients before
    /// the moment updates); set to apply the decay directly to the weights
    /// after each step instead.
    pub decoupled_weight_decay: bool,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub activation: Activation,
    pub hidden_units: usize,
    pub init_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            weight_decay: 1e-5,
            decoupled_weight_decay: false,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 1000,
            activation: Activation::Relu,
            hidden_units: 60,
            init_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::validation("learning rate must be positive"));
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return Err(Error::validation("weight decay must be >= 0"));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::validation(format!("{name} must lie in [0, 1)")));
            }
        }
        if self.epsilon <= 0.0 {
            return Err(Error::validation("epsilon must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::validation("epochs must be at least 1"));
        }
        if self.hidden_units == 0 {
            return Err(Error::validation("hidden_units must be at least 1"));
        }
        Ok(())
    }
}

/// First/second moment accumulators shaped like the parameters, plus the
/// step counter used for bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    m: Vec<LayerParams<T>>,
    v: Vec<LayerParams<T>>,
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(layers: &[LayerParams<T>]) -> Self {
        AdamState {
            m: layers.iter().map(LayerParams::zeros_like).collect(),
            v: layers.iter().map(LayerParams::zeros_like).collect(),
            t: 0,
        }
    }
}

/// One Adam update:
/// `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`, bias-corrected by
/// `1 - b^t`, then `p <- p - lr * m_hat / (sqrt(v_hat) + eps)`.
///
/// Gradients are expected to already contain any weight-decay term.
pub fn adam_step<T: Scalar>(
    params: &mut [LayerParams<T>],
    grads: &[LayerParams<T>],
    state: &mut AdamState<T>,
    cfg: &TrainConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::validation("adam: layer count mismatch"));
    }
    for (p, g) in params.iter().zip(grads) {
        if !p.same_shape(g) {
            return Err(Error::validation(format!(
                "adam: gradient shape {}x{} does not match parameter shape {}x{}",
                g.out_dim(),
                g.in_dim(),
                p.out_dim(),
                p.in_dim()
            )));
        }
    }
    state.t += 1;
    let beta1 = T::from_f64(cfg.beta1);
    let beta2 = T::from_f64(cfg.beta2);
    let lr = T::from_f64(cfg.learning_rate);
    let eps = T::from_f64(cfg.epsilon);
    let c1 = T::one() - T::from_f64(cfg.beta1.powi(state.t as i32));
    let c2 = T::one() - T::from_f64(cfg.beta2.powi(state.t as i32));

    let update = |p: &mut T, g: T, m: &mut T, v: &mut T| {
        *m = beta1 * *m + (T::one() - beta1) * g;
        *v = beta2 * *v + (T::one() - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
    };

    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        Zip::from(&mut p.weights)
            .and(&g.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .for_each(|p, &g, m, v| update(p, g, m, v));
        Zip::from(&mut p.biases)
            .and(&g.biases)
            .and(&mut m.biases)
            .and(&mut v.biases)
            .for_each(|p, &g, m, v| update(p, g, m, v));
    }
    Ok(())
}

/// Coupled L2 decay: adds `weight_decay * w` to the weight gradients only,
/// leaving bias gradients untouched.
pub fn apply_weight_decay<T: Scalar>(
    grads: &mut [LayerParams<T>],
    params: &[LayerParams<T>],
    weight_decay: f64,
) {
    if weight_decay == 0.0 {
        return;
    }
    let wd = T::from_f64(weight_decay);
    for (g, p) in grads.iter_mut().zip(params) {
        Zip::from(&mut g.weights)
            .and(&p.weights)
            .for_each(|g, &w| *g += wd * w);
    }
}

/// Decoupled decay: shrinks weights by `lr * weight_decay` after a step,
/// bypassing the moment estimates. Biases are not decayed.
pub fn apply_decoupled_weight_decay<T: Scalar>(params: &mut [LayerParams<T>], cfg: &TrainConfig) {
    if cfg.weight_decay == 0.0 {
        return;
    }
    let factor = T::from_f64(1.0 - cfg.learning_rate * cfg.weight_decay);
    for p in params.iter_mut() {
        p.weights.mapv_inplace(|w| w * factor);
    }
}
