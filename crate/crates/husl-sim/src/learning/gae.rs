//! Rollout storage and generalized advantage estimation.

use ndarray::Array1;

/// One on-policy rollout. `dones[t]` marks a terminal (or truncated)
/// transition; `next_value` bootstraps the state after the final step.
#[derive(Debug, Clone, Default)]
pub struct RolloutBatch {
    pub obs: Vec<Array1<f64>>,
    pub actions: Vec<Array1<f64>>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub next_value: f64,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Backward-recursive advantage estimate,
/// `A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}` with
/// `delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t`.
/// Returns `(advantages, returns)` where `returns = advantages + values`.
pub fn gae_advantages(batch: &RolloutBatch, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = batch.len();
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let not_done = if batch.dones[t] { 0.0 } else { 1.0 };
        let next_v = if t + 1 < n { batch.values[t + 1] } else { batch.next_value };
        let delta = batch.rewards[t] + gamma * next_v * not_done - batch.values[t];
        acc = delta + gamma * lambda * not_done * acc;
        adv[t] = acc;
    }
    let returns = adv.iter().zip(&batch.values).map(|(a, v)| a + v).collect();
    (adv, returns)
}
