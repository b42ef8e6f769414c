//! Imitation-style reward: a weighted sum of Gaussian tracking kernels over
//! feature groups, plus a survival bonus and an instability penalty.

use serde::{Deserialize, Serialize};

use super::LearningError;
use crate::gait::ReferenceSample;
use crate::model::ReducedState;

/// Kernel weights and scales. Position-like groups (`joint_pos`, `site_pos`,
/// `site_quat`) use `alpha_pos`; velocity-like groups use `alpha_vel`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub joint_pos: f64,
    pub joint_vel: f64,
    pub site_pos: f64,
    pub site_quat: f64,
    pub site_vel: f64,
    pub survival: f64,
    pub stability_penalty: f64,
    pub alpha_pos: f64,
    pub alpha_vel: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            joint_pos: 0.05,
            joint_vel: 0.01,
            site_pos: 0.1,
            site_quat: 0.05,
            site_vel: 0.01,
            survival: 5.0,
            stability_penalty: 4.0,
            alpha_pos: 5.0,
            alpha_vel: 0.5,
        }
    }
}

/// Feature groups compared between the walker and the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    /// Arm joint angles.
    pub joint_pos: Vec<f64>,
    /// Arm joint rates.
    pub joint_vel: Vec<f64>,
    /// World positions: left foot, right foot, total CoM (xy each).
    pub site_pos: Vec<f64>,
    /// Trunk heading.
    pub site_quat: Vec<f64>,
    /// Total-CoM world velocity.
    pub site_vel: Vec<f64>,
}

/// Features of the walker state. `com` and `vel` are the horizontal total
/// CoM position and velocity (trunk plus arm masses).
pub fn extract_features(state: &ReducedState, com: [f64; 2], vel: [f64; 2]) -> FeatureSet {
    FeatureSet {
        joint_pos: state.arm_q().to_vec(),
        joint_vel: state.arm_qd().to_vec(),
        site_pos: vec![
            state.left_foot.x,
            state.left_foot.y,
            state.right_foot.x,
            state.right_foot.y,
            com[0],
            com[1],
        ],
        site_quat: vec![state.heading],
        site_vel: vec![vel[0], vel[1]],
    }
}

/// The same feature groups evaluated on a reference gait sample.
pub fn reference_features(sample: &ReferenceSample) -> FeatureSet {
    FeatureSet {
        joint_pos: sample.arm_q.to_vec(),
        joint_vel: vec![0.0; 4],
        site_pos: vec![
            sample.left_foot.x,
            sample.left_foot.y,
            sample.right_foot.x,
            sample.right_foot.y,
            sample.com[0],
            sample.com[1],
        ],
        site_quat: vec![sample.heading],
        site_vel: vec![sample.vel[0], sample.vel[1]],
    }
}

fn kernel(lhs: &[f64], rhs: &[f64], alpha: f64, term: &'static str) -> Result<f64, LearningError> {
    if lhs.len() != rhs.len() {
        return Err(LearningError::DimensionMismatch { term, lhs: lhs.len(), rhs: rhs.len() });
    }
    let sq: f64 = lhs.iter().zip(rhs).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-alpha * sq).exp())
}

/// Weighted sum of tracking kernels; equals the sum of the five kernel
/// weights under perfect tracking.
pub fn mimic_reward(
    f: &FeatureSet,
    f_ref: &FeatureSet,
    w: &RewardWeights,
) -> Result<f64, LearningError> {
    Ok(w.joint_pos * kernel(&f.joint_pos, &f_ref.joint_pos, w.alpha_pos, "joint_pos")?
        + w.joint_vel * kernel(&f.joint_vel, &f_ref.joint_vel, w.alpha_vel, "joint_vel")?
        + w.site_pos * kernel(&f.site_pos, &f_ref.site_pos, w.alpha_pos, "site_pos")?
        + w.site_quat * kernel(&f.site_quat, &f_ref.site_quat, w.alpha_pos, "site_quat")?
        + w.site_vel * kernel(&f.site_vel, &f_ref.site_vel, w.alpha_vel, "site_vel")?)
}

/// Per-control-step reward: tracking kernels plus the survival bonus, minus
/// the instability penalty when the step ended in a fall.
pub fn step_reward(
    f: &FeatureSet,
    f_ref: &FeatureSet,
    w: &RewardWeights,
    fell: bool,
) -> Result<f64, LearningError> {
    let mut r = mimic_reward(f, f_ref, w)? + w.survival;
    if fell {
        r -= w.stability_penalty;
    }
    Ok(r)
}
