//! Small tanh MLPs with hand-rolled f64 backprop, the Gaussian policy
//! parameter bundle, a flat-vector Adam optimizer, and JSON checkpoints.

use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LearningError;

/// Fully connected network: tanh on hidden layers, linear output.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Per-layer gradient accumulator shaped like an [`Mlp`].
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Mlp {
    /// Xavier-uniform initialization; the output layer is additionally
    /// scaled by `out_scale` (small values keep initial actions near zero).
    pub fn new(sizes: &[usize], out_scale: f64, rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "need input and output sizes");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let scale = if l == sizes.len() - 2 { out_scale } else { 1.0 };
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                scale * limit * (2.0 * rng.random::<f64>() - 1.0)
            });
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Self { weights, biases }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().nrows()
    }

    pub fn forward(&self, x: &Array1<f64>) -> Array1<f64> {
        let mut h = x.clone();
        let last = self.weights.len() - 1;
        for l in 0..=last {
            let mut z = self.weights[l].dot(&h) + &self.biases[l];
            if l < last {
                z.mapv_inplace(f64::tanh);
            }
            h = z;
        }
        h
    }

    /// Forward pass that keeps each layer's input (post-activation of the
    /// previous layer) for [`Mlp::backward`].
    pub fn forward_cached(&self, x: &Array1<f64>) -> (Array1<f64>, Vec<Array1<f64>>) {
        let mut cache = Vec::with_capacity(self.weights.len());
        let mut h = x.clone();
        let last = self.weights.len() - 1;
        for l in 0..=last {
            cache.push(h.clone());
            let mut z = self.weights[l].dot(&h) + &self.biases[l];
            if l < last {
                z.mapv_inplace(f64::tanh);
            }
            h = z;
        }
        (h, cache)
    }

    /// Accumulates dL/dparams into `grads` given dL/doutput; `cache` comes
    /// from [`Mlp::forward_cached`] on the same input.
    pub fn backward(&self, cache: &[Array1<f64>], grad_out: &Array1<f64>, grads: &mut MlpGrads) {
        let mut g = grad_out.clone();
        for l in (0..self.weights.len()).rev() {
            let input = &cache[l];
            let (gw, gb) = (&mut grads.weights[l], &mut grads.biases[l]);
            for (i, gi) in g.iter().enumerate() {
                gb[i] += gi;
                for (j, xj) in input.iter().enumerate() {
                    gw[[i, j]] += gi * xj;
                }
            }
            if l > 0 {
                let mut back = self.weights[l].t().dot(&g);
                // input is the post-tanh activation of layer l-1.
                for (b, h) in back.iter_mut().zip(input.iter()) {
                    *b *= 1.0 - h * h;
                }
                g = back;
            }
        }
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads {
            weights: self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
    }

    fn read_flat(&mut self, src: &[f64], pos: &mut usize) {
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            for v in w.iter_mut() {
                *v = src[*pos];
                *pos += 1;
            }
            for v in b.iter_mut() {
                *v = src[*pos];
                *pos += 1;
            }
        }
    }
}

impl MlpGrads {
    fn write_flat(&self, out: &mut Vec<f64>) {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
    }
}

/// Actor network (observation to action mean), state-independent log
/// standard deviations, and critic network (observation to value).
#[derive(Debug, Clone)]
pub struct PolicyParams {
    pub actor: Mlp,
    pub log_std: Array1<f64>,
    pub critic: Mlp,
}

impl PolicyParams {
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        hidden: &[usize],
        log_std_init: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend_from_slice(hidden);
        actor_sizes.push(act_dim);
        let mut critic_sizes = vec![obs_dim];
        critic_sizes.extend_from_slice(hidden);
        critic_sizes.push(1);
        Self {
            actor: Mlp::new(&actor_sizes, 0.01, rng),
            log_std: Array1::from_elem(act_dim, log_std_init),
            critic: Mlp::new(&critic_sizes, 1.0, rng),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.output_dim()
    }

    pub fn value(&self, obs: &Array1<f64>) -> f64 {
        self.critic.forward(obs)[0]
    }

    pub fn n_params(&self) -> usize {
        self.actor.n_params() + self.log_std.len() + self.critic.n_params()
    }

    /// Parameter order: actor layers (weights row-major, then bias, per
    /// layer), log_std, critic layers. Gradients flatten identically.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        self.actor.write_flat(&mut out);
        out.extend(self.log_std.iter());
        self.critic.write_flat(&mut out);
        out
    }

    pub fn assign_flat(&mut self, src: &[f64]) {
        assert_eq!(src.len(), self.n_params(), "flat parameter length");
        let mut pos = 0;
        self.actor.read_flat(src, &mut pos);
        for v in self.log_std.iter_mut() {
            *v = src[pos];
            pos += 1;
        }
        self.critic.read_flat(src, &mut pos);
    }
}

/// Gradient bundle matching [`PolicyParams::flatten`] order.
#[derive(Debug, Clone)]
pub struct PolicyGrads {
    pub actor: MlpGrads,
    pub log_std: Array1<f64>,
    pub critic: MlpGrads,
}

impl PolicyGrads {
    pub fn zeros(params: &PolicyParams) -> Self {
        Self {
            actor: params.actor.zero_grads(),
            log_std: Array1::zeros(params.log_std.raw_dim()),
            critic: params.critic.zero_grads(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.actor.write_flat(&mut out);
        out.extend(self.log_std.iter());
        self.critic.write_flat(&mut out);
        out
    }
}

/// Adam over the flattened parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(lr: f64, n: usize) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / b1t;
            let v_hat = self.v[i] / b2t;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointJson {
    obs_dim: usize,
    act_dim: usize,
    actor: Vec<LayerJson>,
    log_std: Vec<f64>,
    critic: Vec<LayerJson>,
}

fn layers_to_json(net: &Mlp) -> Vec<LayerJson> {
    net.weights
        .iter()
        .zip(&net.biases)
        .map(|(w, b)| LayerJson {
            rows: w.nrows(),
            cols: w.ncols(),
            weights: w.iter().copied().collect(),
            bias: b.to_vec(),
        })
        .collect()
}

fn layers_from_json(layers: Vec<LayerJson>) -> Result<Mlp, LearningError> {
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for (i, l) in layers.into_iter().enumerate() {
        if l.weights.len() != l.rows * l.cols || l.bias.len() != l.rows {
            return Err(LearningError::BadCheckpoint(format!("layer {i} shape mismatch")));
        }
        if let Some(prev) = weights.last() {
            let prev: &Array2<f64> = prev;
            if l.cols != prev.nrows() {
                return Err(LearningError::BadCheckpoint(format!("layer {i} input dim")));
            }
        }
        let w = Array2::from_shape_vec((l.rows, l.cols), l.weights)
            .map_err(|e| LearningError::BadCheckpoint(e.to_string()))?;
        weights.push(w);
        biases.push(Array1::from(l.bias));
    }
    if weights.is_empty() {
        return Err(LearningError::BadCheckpoint("empty network".into()));
    }
    Ok(Mlp { weights, biases })
}

/// Writes the policy to JSON. f64 values round-trip exactly.
pub fn save_checkpoint(path: &Path, params: &PolicyParams) -> Result<(), LearningError> {
    let ckpt = CheckpointJson {
        obs_dim: params.obs_dim(),
        act_dim: params.act_dim(),
        actor: layers_to_json(&params.actor),
        log_std: params.log_std.to_vec(),
        critic: layers_to_json(&params.critic),
    };
    let text = serde_json::to_string_pretty(&ckpt)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<PolicyParams, LearningError> {
    let text = std::fs::read_to_string(path)?;
    let ckpt: CheckpointJson = serde_json::from_str(&text)?;
    let actor = layers_from_json(ckpt.actor)?;
    let critic = layers_from_json(ckpt.critic)?;
    if actor.input_dim() != ckpt.obs_dim || critic.input_dim() != ckpt.obs_dim {
        return Err(LearningError::BadCheckpoint("observation dim mismatch".into()));
    }
    if actor.output_dim() != ckpt.act_dim || ckpt.log_std.len() != ckpt.act_dim {
        return Err(LearningError::BadCheckpoint("action dim mismatch".into()));
    }
    if critic.output_dim() != 1 {
        return Err(LearningError::BadCheckpoint("critic must output one value".into()));
    }
    Ok(PolicyParams { actor, log_std: Array1::from(ckpt.log_std), critic })
}
