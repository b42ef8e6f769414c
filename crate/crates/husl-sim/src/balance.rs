//! Center-of-support algebra and the model-based arm-balancing law.
//!
//! The stability signal is the horizontal offset between the total CoM and
//! the center of support (CoS). The CoS is the stance foot's geometric
//! center during single support and the force-weighted mean of the per-foot
//! centers of pressure during double support. The balancing law maps that
//! offset linearly to arm joint targets around a base pose; a PD loop turns
//! targets into torques. Arm control never writes leg channels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gait::FootstepCommand;
use crate::model::{GrfSample, SupportPhase};

/// Vertical force below which a foot does not count as supporting, N.
pub const FZ_EPSILON: f64 = 1.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BalanceError {
    #[error("foot carries no load (fz below threshold)")]
    NoContact,
    #[error("no supporting foot")]
    NoSupport,
}

/// Gains and poses of the arm-balancing layer.
///
/// `kp_arm` rows follow the arm joint order [left pitch, left roll, right
/// pitch, right roll]; columns are the (x, y) components of the stability
/// offset. Roll gains carry opposite signs per arm because roll is positive
/// outward on both sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceGains {
    pub kp_arm: [[f64; 2]; 4],
    /// PD proportional gain per joint, N*m/rad.
    pub kp: [f64; 4],
    /// PD derivative gain per joint, N*m*s/rad.
    pub kd: [f64; 4],
    /// Neutral arm pose the balance law modulates, rad.
    pub q_base: [f64; 4],
    /// Symmetric clamp on every joint target, rad.
    pub joint_limit: f64,
    /// Fixed forward-reaching pose held in the static-payload mode, rad.
    pub static_pose: [f64; 4],
}

impl Default for BalanceGains {
    fn default() -> Self {
        // The balance map is reaction-first, hence the negative gains: the
        // arms accelerate the payload *toward* the measured offset, and the
        // force they exert on the trunk pushes the support point back under
        // the center of mass within the same stride. Leaning away instead
        // (positive gains) only pays off at quasi-static timescales, where
        // the footstep regulator has long since absorbed the offset, while
        // its immediate reaction drives the support point the wrong way.
        // The PD loop stays soft so arm maneuvers remain slower than the
        // pendulum time constant.
        Self {
            kp_arm: [[-4.0, 0.0], [0.0, -2.8], [-4.0, 0.0], [0.0, 2.8]],
            kp: [35.0; 4],
            kd: [6.0; 4],
            q_base: [0.4, 0.0, 0.4, 0.0],
            joint_limit: 1.6,
            static_pose: [1.2, 0.0, 1.2, 0.0],
        }
    }
}

/// How the arm channels are driven during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// No arm bodies; arm channels are absent.
    Baseline,
    /// Arms PD-hold the fixed forward-reaching pose.
    StaticHold,
    /// Balance law drives arm targets from the stability offset.
    DynamicBalance,
}

/// Leg command plus optional arm torques. `arm_torques` is `None` in
/// baseline mode (the walker has no arms to actuate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedControl {
    pub leg: FootstepCommand,
    pub arm_torques: Option<[f64; 4]>,
}

/// Center of pressure in the foot frame: `[-ty/fz, tx/fz]`, m.
pub fn cop_local(grf: &GrfSample) -> Result<[f64; 2], BalanceError> {
    if grf.fz <= FZ_EPSILON {
        return Err(BalanceError::NoContact);
    }
    Ok([-grf.ty / grf.fz, grf.tx / grf.fz])
}

/// Horizontal center of support.
///
/// Single support: the stance foot's geometric center, regardless of where
/// its center of pressure sits. Double support: the force-weighted mean of
/// the world-frame per-foot centers of pressure; feet below [`FZ_EPSILON`]
/// drop out of the mean.
pub fn estimate_cos(
    left: &GrfSample,
    right: &GrfSample,
    phase: SupportPhase,
) -> Result<[f64; 2], BalanceError> {
    match phase.kind.stance() {
        Some(crate::model::Foot::Left) => {
            if left.fz <= FZ_EPSILON {
                return Err(BalanceError::NoSupport);
            }
            Ok(left.foot.xy())
        }
        Some(crate::model::Foot::Right) => {
            if right.fz <= FZ_EPSILON {
                return Err(BalanceError::NoSupport);
            }
            Ok(right.foot.xy())
        }
        None => {
            let mut weighted = [0.0, 0.0];
            let mut total = 0.0;
            for grf in [left, right] {
                if grf.fz > FZ_EPSILON {
                    let cop = cop_local(grf)?;
                    let world = grf.foot.to_world(cop);
                    weighted[0] += grf.fz * world[0];
                    weighted[1] += grf.fz * world[1];
                    total += grf.fz;
                }
            }
            if total <= 0.0 {
                return Err(BalanceError::NoSupport);
            }
            Ok([weighted[0] / total, weighted[1] / total])
        }
    }
}

/// Horizontal CoM-minus-CoS offset, the balance law's input, m.
pub fn stability_indicator(com_xy: [f64; 2], cos_xy: [f64; 2]) -> [f64; 2] {
    [com_xy[0] - cos_xy[0], com_xy[1] - cos_xy[1]]
}

/// Arm joint targets: base pose shifted against the stability offset,
/// clamped to the joint limit.
pub fn arm_target(gains: &BalanceGains, d: [f64; 2]) -> [f64; 4] {
    let mut q = [0.0; 4];
    for j in 0..4 {
        let shift = gains.kp_arm[j][0] * d[0] + gains.kp_arm[j][1] * d[1];
        q[j] = (gains.q_base[j] - shift).clamp(-gains.joint_limit, gains.joint_limit);
    }
    q
}

/// PD torque per joint: `kp (q_target - q) - kd qd`.
pub fn pd_torque(gains: &BalanceGains, q_target: [f64; 4], q: [f64; 4], qd: [f64; 4]) -> [f64; 4] {
    let mut tau = [0.0; 4];
    for j in 0..4 {
        tau[j] = gains.kp[j] * (q_target[j] - q[j]) - gains.kd[j] * qd[j];
    }
    tau
}

/// Arm torques for the current mode, or `None` when the walker has no arms.
pub fn arm_command(
    mode: ControlMode,
    gains: &BalanceGains,
    d: [f64; 2],
    q: [f64; 4],
    qd: [f64; 4],
) -> Option<[f64; 4]> {
    match mode {
        ControlMode::Baseline => None,
        ControlMode::StaticHold => Some(pd_torque(gains, gains.static_pose, q, qd)),
        ControlMode::DynamicBalance => Some(pd_torque(gains, arm_target(gains, d), q, qd)),
    }
}

/// Routes the leg command through untouched and attaches arm torques
/// according to the mode. Arm control cannot modify leg channels.
pub fn fuse_controls(
    leg: FootstepCommand,
    arm_torques: Option<[f64; 4]>,
    mode: ControlMode,
) -> CombinedControl {
    let arm = match mode {
        ControlMode::Baseline => None,
        _ => arm_torques,
    };
    CombinedControl { leg, arm_torques: arm }
}
