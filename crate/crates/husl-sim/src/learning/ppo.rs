//! Clipped-surrogate policy optimization with an exactly differentiated
//! loss: every gradient term below is checkable against central finite
//! differences of [`ppo_loss`].

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::Rng;

use super::gae::{gae_advantages, RolloutBatch};
use super::net::{Adam, PolicyParams};
use super::{LearningConfig, LearningError};

pub use super::net::PolicyGrads;

const LN_2PI: f64 = 1.8378770664093453;

/// Log density of a diagonal Gaussian.
pub fn gaussian_log_prob(mean: &Array1<f64>, log_std: &Array1<f64>, action: &Array1<f64>) -> f64 {
    let mut lp = -0.5 * LN_2PI * mean.len() as f64;
    for i in 0..mean.len() {
        let z = (action[i] - mean[i]) / log_std[i].exp();
        lp += -0.5 * z * z - log_std[i];
    }
    lp
}

/// Entropy of a diagonal Gaussian; depends only on the log stds.
pub fn gaussian_entropy(log_std: &Array1<f64>) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 * (1.0 + LN_2PI)).sum()
}

/// Loss components. `total` is the differentiated objective:
/// `policy + value_coef*value - entropy_coef*entropy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
}

/// Clipped-surrogate loss and its exact gradient over one minibatch.
/// `advantages` are used as given (normalization happens upstream);
/// `returns` are the value targets.
#[allow(clippy::too_many_arguments)]
pub fn ppo_loss(
    params: &PolicyParams,
    obs: &[Array1<f64>],
    actions: &[Array1<f64>],
    old_log_probs: &[f64],
    advantages: &[f64],
    returns: &[f64],
    clip_epsilon: f64,
    value_coef: f64,
    entropy_coef: f64,
) -> (LossBreakdown, PolicyGrads) {
    let n = obs.len();
    assert!(n > 0, "empty minibatch");
    assert!(
        actions.len() == n && old_log_probs.len() == n && advantages.len() == n && returns.len() == n,
        "minibatch field lengths must agree"
    );
    let inv_n = 1.0 / n as f64;
    let act_dim = params.act_dim();
    let mut grads = PolicyGrads::zeros(params);
    let mut policy_loss = 0.0;
    let mut value_loss = 0.0;

    for k in 0..n {
        let (mean, actor_cache) = params.actor.forward_cached(&obs[k]);
        let (v_out, critic_cache) = params.critic.forward_cached(&obs[k]);
        let v = v_out[0];

        let mut lp = -0.5 * LN_2PI * act_dim as f64;
        let mut z = Array1::zeros(act_dim);
        for i in 0..act_dim {
            let sigma = params.log_std[i].exp();
            z[i] = (actions[k][i] - mean[i]) / sigma;
            lp += -0.5 * z[i] * z[i] - params.log_std[i];
        }
        let ratio = (lp - old_log_probs[k]).exp();
        let adv = advantages[k];
        let clipped_ratio = ratio.clamp(1.0 - clip_epsilon, 1.0 + clip_epsilon);
        let unclipped = ratio * adv;
        let clipped = clipped_ratio * adv;
        // min() chooses the unclipped branch on ties; the clipped branch is
        // only taken with the clamp saturated, where its gradient is zero.
        let (surrogate, grad_flows) =
            if unclipped <= clipped { (unclipped, true) } else { (clipped, false) };
        policy_loss += -surrogate * inv_n;

        if grad_flows {
            let dl_dlp = -adv * ratio * inv_n;
            let mut dmean = Array1::zeros(act_dim);
            for i in 0..act_dim {
                let sigma = params.log_std[i].exp();
                dmean[i] = dl_dlp * z[i] / sigma;
                grads.log_std[i] += dl_dlp * (z[i] * z[i] - 1.0);
            }
            params.actor.backward(&actor_cache, &dmean, &mut grads.actor);
        }

        let vd = v - returns[k];
        value_loss += 0.5 * vd * vd * inv_n;
        let dv = Array1::from(vec![value_coef * vd * inv_n]);
        params.critic.backward(&critic_cache, &dv, &mut grads.critic);
    }

    let entropy = gaussian_entropy(&params.log_std);
    for g in grads.log_std.iter_mut() {
        *g -= entropy_coef;
    }
    let total = policy_loss + value_coef * value_loss - entropy_coef * entropy;
    (LossBreakdown { total, policy: policy_loss, value: value_loss, entropy }, grads)
}

/// Mean loss components over the minibatches of one update.
#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// One policy-optimization update over a rollout: advantage estimation,
/// normalization, then `epochs` passes of shuffled minibatch Adam steps.
pub fn update_policy(
    params: &mut PolicyParams,
    batch: &RolloutBatch,
    cfg: &LearningConfig,
    opt: &mut Adam,
    rng: &mut impl Rng,
    iteration: usize,
) -> Result<UpdateStats, LearningError> {
    let (mut adv, returns) = gae_advantages(batch, cfg.gamma, cfg.gae_lambda);
    let n = batch.len();
    let mean = adv.iter().sum::<f64>() / n as f64;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    for a in adv.iter_mut() {
        *a = (*a - mean) / (std + 1e-8);
    }

    let mut indices: Vec<usize> = (0..n).collect();
    let mb = cfg.minibatch_size.max(1);
    let mut stats = UpdateStats::default();
    let mut batches = 0usize;
    for _ in 0..cfg.epochs {
        indices.shuffle(rng);
        for chunk in indices.chunks(mb) {
            let obs: Vec<_> = chunk.iter().map(|&i| batch.obs[i].clone()).collect();
            let acts: Vec<_> = chunk.iter().map(|&i| batch.actions[i].clone()).collect();
            let lps: Vec<_> = chunk.iter().map(|&i| batch.log_probs[i]).collect();
            let advs: Vec<_> = chunk.iter().map(|&i| adv[i]).collect();
            let rets: Vec<_> = chunk.iter().map(|&i| returns[i]).collect();
            let (loss, grads) = ppo_loss(
                params,
                &obs,
                &acts,
                &lps,
                &advs,
                &rets,
                cfg.clip_epsilon,
                cfg.value_coef,
                cfg.entropy_coef,
            );
            if !loss.total.is_finite() {
                return Err(LearningError::TrainingDiverged { iteration });
            }
            let mut flat = params.flatten();
            opt.step(&mut flat, &grads.flatten());
            params.assign_flat(&flat);
            stats.policy_loss += loss.policy;
            stats.value_loss += loss.value;
            stats.entropy += loss.entropy;
            batches += 1;
        }
    }
    if batches > 0 {
        stats.policy_loss /= batches as f64;
        stats.value_loss /= batches as f64;
        stats.entropy /= batches as f64;
    }
    Ok(stats)
}
