//! Residual-policy learning: a small Gaussian MLP policy proposes footstep
//! residuals on top of the nominal plan and is trained with clipped-surrogate
//! policy optimization against an imitation-style reward. Everything runs in
//! f64 with hand-rolled backprop so gradients can be checked against finite
//! differences exactly.

mod curriculum;
mod env;
mod gae;
mod net;
mod ppo;
mod reward;
mod trainer;

pub use curriculum::{curriculum_at, stage_arm_pose, CurriculumPhase, CurriculumSchedule};
pub use env::{build_observation, EnvConfig, StepResult, WalkerEnv, ACTION_DIM, OBS_DIM};
pub use gae::{gae_advantages, RolloutBatch};
pub use net::{load_checkpoint, save_checkpoint, Adam, Mlp, PolicyParams};
pub use ppo::{
    gaussian_entropy, gaussian_log_prob, ppo_loss, update_policy, LossBreakdown, PolicyGrads,
};
pub use reward::{
    extract_features, mimic_reward, reference_features, step_reward, FeatureSet, RewardWeights,
};
pub use trainer::{train, write_training_log, EpisodeStat, TrainLogRow, TrainResult};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LearningError {
    #[error("curriculum progress {0} outside [0, 1]")]
    InvalidProgress(f64),
    #[error("feature dimension mismatch in {term}: {lhs} vs {rhs}")]
    DimensionMismatch { term: &'static str, lhs: usize, rhs: usize },
    #[error("non-finite loss at update {iteration}")]
    TrainingDiverged { iteration: usize },
    #[error("checkpoint rejected: {0}")]
    BadCheckpoint(String),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint encoding: {0}")]
    Json(#[from] serde_json::Error),
}

/// Hyperparameters for the optimizer, rollout collection, and the training
/// environment. All fields have working defaults so a config file only
/// needs to override what it cares about.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    /// Environment steps collected per policy update.
    pub rollout_steps: usize,
    pub total_steps: usize,
    pub hidden_layers: Vec<usize>,
    pub seed: u64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Initial log standard deviation of the action distribution. Actions
    /// are in bound-normalized units, so 0.5 std spans half the clamp range.
    pub log_std_init: f64,
    /// Physics steps per control decision.
    pub control_substeps: usize,
    /// Episode truncation horizon, in control steps.
    pub episode_max_steps: usize,
    /// Scale of the uniform perturbation applied to the initial trunk state.
    pub init_noise: f64,
    pub reward: RewardWeights,
    pub curriculum: CurriculumSchedule,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            learning_rate: 3e-4,
            epochs: 4,
            minibatch_size: 256,
            rollout_steps: 1024,
            total_steps: 200_000,
            hidden_layers: vec![64, 64],
            seed: 0,
            value_coef: 0.5,
            entropy_coef: 0.005,
            log_std_init: -0.7,
            control_substeps: 50,
            episode_max_steps: 240,
            init_noise: 0.002,
            reward: RewardWeights::default(),
            curriculum: CurriculumSchedule::default(),
        }
    }
}
