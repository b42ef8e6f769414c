//! On-policy training loop: collect rollouts from the walker environment,
//! update the policy, and log per-iteration episode statistics.

use std::io::Write as _;
use std::path::Path;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::env::{EnvConfig, WalkerEnv, ACTION_DIM, OBS_DIM};
use super::gae::RolloutBatch;
use super::net::{Adam, PolicyParams};
use super::ppo::{gaussian_log_prob, update_policy};
use super::{LearningConfig, LearningError};

/// One line of the training log, written after each policy update.
#[derive(Debug, Clone, Copy)]
pub struct TrainLogRow {
    pub step: u64,
    pub mean_return: f64,
    pub mean_episode_length: f64,
}

/// One finished episode. `end_step` is the global environment step at which
/// it terminated, which places it on the training timeline.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeStat {
    pub end_step: u64,
    pub ret: f64,
    pub len: usize,
}

pub struct TrainResult {
    pub params: PolicyParams,
    pub log: Vec<TrainLogRow>,
    pub episodes: Vec<EpisodeStat>,
}

/// Standard normal via Box-Muller; two uniform draws per sample keeps the
/// stream layout fixed.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Runs the full training loop. Deterministic for a fixed config: networks,
/// environment, and exploration use independent counter-seeded streams.
pub fn train(cfg: &LearningConfig, base_env: EnvConfig) -> Result<TrainResult, LearningError> {
    let mut env_cfg = base_env;
    env_cfg.control_substeps = cfg.control_substeps;
    env_cfg.episode_max_steps = cfg.episode_max_steps;
    env_cfg.init_noise = cfg.init_noise;
    env_cfg.reward = cfg.reward;
    env_cfg.curriculum = cfg.curriculum.clone();

    let mut net_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut explore_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5EED_0001));
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5EED_0002));
    let mut env = WalkerEnv::new(env_cfg, cfg.seed.wrapping_add(0x5EED_0003))?;

    let mut params =
        PolicyParams::new(OBS_DIM, ACTION_DIM, &cfg.hidden_layers, cfg.log_std_init, &mut net_rng);
    let mut opt = Adam::new(cfg.learning_rate, params.n_params());

    let mut obs = env.reset(0.0)?;
    let mut episodes: Vec<EpisodeStat> = Vec::new();
    let mut log = Vec::new();
    let mut ep_ret = 0.0;
    let mut ep_len = 0usize;
    let mut global_step: u64 = 0;
    let mut iteration = 0usize;

    while (global_step as usize) < cfg.total_steps {
        let mut batch = RolloutBatch::default();
        let episodes_before = episodes.len();
        for _ in 0..cfg.rollout_steps {
            let mean = params.actor.forward(&obs);
            let value = params.value(&obs);
            let mut action = Array1::zeros(ACTION_DIM);
            for i in 0..ACTION_DIM {
                action[i] =
                    mean[i] + params.log_std[i].exp() * standard_normal(&mut explore_rng);
            }
            let log_prob = gaussian_log_prob(&mean, &params.log_std, &action);
            let result = env.step([action[0], action[1], action[2]]);

            batch.obs.push(obs);
            batch.actions.push(action);
            batch.log_probs.push(log_prob);
            batch.rewards.push(result.reward);
            batch.values.push(value);
            batch.dones.push(result.done);

            global_step += 1;
            ep_ret += result.reward;
            ep_len += 1;
            if result.done {
                episodes.push(EpisodeStat { end_step: global_step, ret: ep_ret, len: ep_len });
                ep_ret = 0.0;
                ep_len = 0;
                let progress =
                    (global_step as f64 / cfg.total_steps as f64).min(1.0);
                obs = env.reset(progress)?;
            } else {
                obs = result.obs;
            }
        }
        batch.next_value = params.value(&obs);
        update_policy(&mut params, &batch, cfg, &mut opt, &mut shuffle_rng, iteration)?;
        iteration += 1;

        let window = &episodes[episodes_before..];
        let row = if window.is_empty() {
            // No episode finished this iteration; carry the last estimate.
            let prev = log.last().copied().unwrap_or(TrainLogRow {
                step: global_step,
                mean_return: ep_ret,
                mean_episode_length: ep_len as f64,
            });
            TrainLogRow { step: global_step, ..prev }
        } else {
            let n = window.len() as f64;
            TrainLogRow {
                step: global_step,
                mean_return: window.iter().map(|e| e.ret).sum::<f64>() / n,
                mean_episode_length: window.iter().map(|e| e.len as f64).sum::<f64>() / n,
            }
        };
        log.push(row);
    }

    Ok(TrainResult { params, log, episodes })
}

/// Writes the per-update log as CSV with a fixed header.
pub fn write_training_log(path: &Path, log: &[TrainLogRow]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "step,mean_return,mean_episode_length")?;
    for row in log {
        writeln!(out, "{},{},{}", row.step, row.mean_return, row.mean_episode_length)?;
    }
    out.flush()
}
