//! Analytic reference gait and footstep planning.
//!
//! The reference motion is a closed-form walking pattern consistent with the
//! model's step schedule: constant forward speed, sinusoidal lateral sway
//! (one cycle per stride, toward the stance side), and alternating footstep
//! placements. A footstep residual, produced by either the learned policy or
//! a hand-written regulator, perturbs the planned placements within
//! configured bounds.

use serde::{Deserialize, Serialize};

use crate::model::{Foot, ModelParams, PlanarPose};

/// Command for the next touchdown: which foot lands, where, and how much
/// the current single-support phase is stretched (positive) or shortened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootstepCommand {
    pub foot: Foot,
    pub target: PlanarPose,
    pub timing_offset: f64,
}

/// Clamping bounds for footstep residuals, m and s.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualBounds {
    pub max_dx: f64,
    pub max_dy: f64,
    pub max_dt: f64,
}

impl Default for ResidualBounds {
    fn default() -> Self {
        Self { max_dx: 0.06, max_dy: 0.04, max_dt: 0.08 }
    }
}

/// Closed-form reference gait.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceMotion {
    /// Duration of one stride (two footsteps), s.
    pub stride_period: f64,
    /// Mean forward speed, m/s.
    pub forward_speed: f64,
    /// Lateral sway amplitude, m.
    pub sway_amplitude: f64,
    /// Lateral distance between foot centers, m.
    pub step_width: f64,
    /// Nominal arm pose held during reference walking, joint order
    /// [left pitch, left roll, right pitch, right roll].
    pub nominal_arm: [f64; 4],
}

impl Default for ReferenceMotion {
    fn default() -> Self {
        Self::from_params(&ModelParams::default(), 0.03)
    }
}

impl ReferenceMotion {
    /// Reference consistent with the model's step schedule: one footstep per
    /// single+double support, advancing `step_length` each.
    pub fn from_params(params: &ModelParams, sway_amplitude: f64) -> Self {
        let step_time = params.t_single_support + params.t_double_support;
        Self {
            stride_period: params.stride_period(),
            forward_speed: params.step_length / step_time,
            sway_amplitude,
            step_width: params.step_width,
            nominal_arm: [0.4, 0.0, 0.4, 0.0],
        }
    }

    /// Forward travel per stride, m.
    pub fn stride_length(&self) -> f64 {
        self.forward_speed * self.stride_period
    }
}

/// Reference pose sampled at a stride phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub com: [f64; 2],
    pub vel: [f64; 2],
    pub heading: f64,
    pub arm_q: [f64; 4],
    pub left_foot: PlanarPose,
    pub right_foot: PlanarPose,
}

/// Samples the reference gait at `phase` strides (integer part counts whole
/// strides). Forward progress is linear in phase; lateral sway is one sine
/// cycle per stride, peaking toward the stance side during single support.
pub fn reference_state(phase: f64, motion: &ReferenceMotion) -> ReferenceSample {
    assert!(phase >= 0.0, "reference phase must be >= 0");
    let two_pi = std::f64::consts::TAU;
    let stride_len = motion.stride_length();
    let x = stride_len * phase;
    let y = motion.sway_amplitude * (two_pi * phase).sin();
    let vx = motion.forward_speed;
    let vy = motion.sway_amplitude * two_pi / motion.stride_period * (two_pi * phase).cos();

    // Stride k: the left foot stands on placement 2k the whole stride; the
    // right foot moves from placement 2k-1 to 2k+1 at mid-stride.
    let k = phase.floor();
    let within = phase - k;
    let half_step = 0.5 * stride_len;
    let left_x = 2.0 * k * half_step;
    let right_x = if within < 0.5 {
        (2.0 * k - 1.0).max(0.0) * half_step
    } else {
        (2.0 * k + 1.0) * half_step
    };
    let half_w = 0.5 * motion.step_width;
    ReferenceSample {
        com: [x, y],
        vel: [vx, vy],
        heading: 0.0,
        arm_q: motion.nominal_arm,
        left_foot: PlanarPose { x: left_x, y: half_w, yaw: 0.0 },
        right_foot: PlanarPose { x: right_x, y: -half_w, yaw: 0.0 },
    }
}

/// Nominal placement of footstep `index`: even indices are left-foot
/// placements, odd are right; each advances `step_length`.
pub fn footstep_plan(index: u64, params: &ModelParams) -> FootstepCommand {
    let foot = if index % 2 == 0 { Foot::Left } else { Foot::Right };
    let target = PlanarPose {
        x: index as f64 * params.step_length,
        y: foot.sign() * 0.5 * params.step_width,
        yaw: 0.0,
    };
    FootstepCommand { foot, target, timing_offset: 0.0 }
}

/// Applies a bounded residual `[dx, dy, dt]` to a nominal command.
pub fn apply_residual(
    nominal: &FootstepCommand,
    action: [f64; 3],
    bounds: &ResidualBounds,
) -> FootstepCommand {
    let dx = action[0].clamp(-bounds.max_dx, bounds.max_dx);
    let dy = action[1].clamp(-bounds.max_dy, bounds.max_dy);
    let dt = action[2].clamp(-bounds.max_dt, bounds.max_dt);
    FootstepCommand {
        foot: nominal.foot,
        target: PlanarPose {
            x: nominal.target.x + dx,
            y: nominal.target.y + dy,
            yaw: nominal.target.yaw,
        },
        timing_offset: nominal.timing_offset + dt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_is_periodic_up_to_forward_travel() {
        let motion = ReferenceMotion::default();
        for phase in [0.0, 0.13, 0.4, 0.77] {
            let a = reference_state(phase, &motion);
            let b = reference_state(phase + 1.0, &motion);
            assert_relative_eq!(b.com[0] - a.com[0], motion.stride_length(), epsilon = 1e-9);
            assert_relative_eq!(b.com[1], a.com[1], epsilon = 1e-9);
            assert_relative_eq!(b.vel[0], a.vel[0], epsilon = 1e-12);
            assert_relative_eq!(b.vel[1], a.vel[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn reference_position_is_continuous() {
        let motion = ReferenceMotion::default();
        let mut prev = reference_state(0.0, &motion);
        let steps = 2000;
        for i in 1..=steps {
            let phase = 2.0 * i as f64 / steps as f64;
            let cur = reference_state(phase, &motion);
            let max_move = 1.5 * motion.forward_speed * (2.0 / steps as f64)
                * motion.stride_period
                + 1e-3;
            assert!((cur.com[0] - prev.com[0]).abs() < max_move + 1e-3);
            assert!((cur.com[1] - prev.com[1]).abs() < 1e-3);
            prev = cur;
        }
    }

    #[test]
    fn reference_sways_toward_the_stance_side() {
        let motion = ReferenceMotion::default();
        // Mid single-left support (left foot is stance, sway left = +y).
        let p = ModelParams::default();
        let mid_left = (p.t_double_support + 0.5 * p.t_single_support) / p.stride_period();
        assert!(reference_state(mid_left, &motion).com[1] > 0.0);
        let mid_right = 0.5 + mid_left;
        assert!(reference_state(mid_right, &motion).com[1] < 0.0);
    }

    #[test]
    fn footstep_plan_alternates_and_advances() {
        let params = ModelParams::default();
        let s0 = footstep_plan(0, &params);
        assert_eq!(s0.foot, Foot::Left);
        assert_eq!(s0.target, PlanarPose { x: 0.0, y: 0.1, yaw: 0.0 });
        let s1 = footstep_plan(1, &params);
        assert_eq!(s1.foot, Foot::Right);
        assert_eq!(s1.target, PlanarPose { x: 0.25, y: -0.1, yaw: 0.0 });
        for k in 0..10 {
            let a = footstep_plan(k, &params);
            let b = footstep_plan(k + 2, &params);
            assert_eq!(a.foot, b.foot);
            assert_relative_eq!(b.target.x - a.target.x, 2.0 * params.step_length);
        }
    }

    #[test]
    fn residuals_are_clamped() {
        let params = ModelParams::default();
        let bounds = ResidualBounds::default();
        let nominal = footstep_plan(3, &params);
        let cmd = apply_residual(&nominal, [10.0, -10.0, 10.0], &bounds);
        assert_relative_eq!(cmd.target.x, nominal.target.x + bounds.max_dx);
        assert_relative_eq!(cmd.target.y, nominal.target.y - bounds.max_dy);
        assert_relative_eq!(cmd.timing_offset, bounds.max_dt);
        let small = apply_residual(&nominal, [0.01, 0.005, -0.02], &bounds);
        assert_relative_eq!(small.target.x, nominal.target.x + 0.01);
        assert_relative_eq!(small.target.y, nominal.target.y + 0.005);
        assert_relative_eq!(small.timing_offset, -0.02);
    }

    #[test]
    fn reference_feet_land_on_the_footstep_plan() {
        let motion = ReferenceMotion::default();
        let params = ModelParams::default();
        // Late in stride 1 the left foot stands on placement 2, the right
        // foot on placement 3.
        let s = reference_state(1.8, &motion);
        assert_relative_eq!(s.left_foot.x, footstep_plan(2, &params).target.x);
        assert_relative_eq!(s.right_foot.x, footstep_plan(3, &params).target.x);
    }
}
