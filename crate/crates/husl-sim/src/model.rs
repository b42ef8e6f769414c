//! Reduced-order walker dynamics.
//!
//! The body is a linear inverted pendulum of fixed height carrying two
//! 2-DoF point-mass arms (shoulder pitch and roll per arm, link mass at the
//! midpoint, payload mass at the tip). Feet are massless rectangles placed
//! by a footstep schedule; ground reaction forces are synthesized from a
//! commanded zero-moment point rather than solved from contact.
//!
//! Couplings between the arms and the pendulum:
//! * arm masses shift the total CoM, so the trunk recoils when arms move;
//! * trunk acceleration back-drives the arm joints (inertial torque);
//! * arm-mass acceleration shifts the realized center of pressure, clamped
//!   to the foot geometry, which is how arm motion can steer the pendulum.
//!
//! Integration is semi-implicit Euler at a fixed `dt` and is deterministic:
//! identical inputs produce bit-identical successor states.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balance;
use crate::gait::FootstepCommand;
use crate::vec2::{add2, add3, dot2, norm2, rot2, scale2, scale3, sub2};

/// Joint vector order used for arm torques, targets, and gains:
/// `[left pitch, left roll, right pitch, right roll]`.
pub const JOINT_ORDER: [&str; 4] = ["left_pitch", "left_roll", "right_pitch", "right_roll"];

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("total mass is zero")]
    ZeroMass,
    #[error("state diverged (non-finite component) at t = {t}")]
    Diverged { t: f64 },
    #[error("no supporting foot: {0}")]
    NoSupport(#[from] balance::BalanceError),
}

/// Physical and scheduling parameters of the reduced walker.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Trunk (pendulum) mass, kg.
    pub trunk_mass: f64,
    /// Mass of one arm link, kg, lumped at the link midpoint.
    pub arm_link_mass: f64,
    /// Payload mass carried at each arm tip, kg.
    pub payload_mass: f64,
    /// Left shoulder position relative to the trunk CoM, m; the right
    /// shoulder mirrors the y component.
    pub shoulder_offset: [f64; 3],
    /// Arm length from shoulder to tip, m.
    pub upper_arm_length: f64,
    /// Pendulum height z0, m; the trunk CoM stays at this height.
    pub pendulum_height: f64,
    /// Gravity, m/s^2.
    pub gravity: f64,
    /// Foot extent along the foot x axis, m.
    pub foot_length: f64,
    /// Foot extent along the foot y axis, m.
    pub foot_width: f64,
    /// Nominal forward travel per footstep, m.
    pub step_length: f64,
    /// Lateral distance between left and right foot centers, m.
    pub step_width: f64,
    /// Single-support duration, s.
    pub t_single_support: f64,
    /// Double-support duration, s.
    pub t_double_support: f64,
    /// Integration step, s.
    pub dt: f64,
    /// Viscous damping at each arm joint, N*m*s/rad.
    pub arm_damping: f64,
    /// Optional symmetric torque cap per arm joint, N*m. Saturation is off
    /// by default.
    pub torque_limit: Option<f64>,
    /// Scale on the two-way arm/trunk inertial coupling. 1 = physical,
    /// 0 = arms and pendulum exchange no reaction forces.
    pub arm_coupling: f64,
    /// Horizontal distance of the total CoM from the support polygon beyond
    /// which the walker counts as fallen, m.
    pub fall_radius: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            trunk_mass: 47.0,
            arm_link_mass: 4.0,
            payload_mass: 0.0,
            shoulder_offset: [-0.05, 0.25, 0.45],
            upper_arm_length: 0.6,
            pendulum_height: 0.9,
            gravity: 9.81,
            foot_length: 0.2,
            foot_width: 0.1,
            step_length: 0.25,
            step_width: 0.2,
            t_single_support: 0.35,
            t_double_support: 0.15,
            dt: 1e-3,
            arm_damping: 12.0,
            torque_limit: None,
            arm_coupling: 1.0,
            fall_radius: 0.35,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("trunk_mass", self.trunk_mass),
            ("upper_arm_length", self.upper_arm_length),
            ("pendulum_height", self.pendulum_height),
            ("gravity", self.gravity),
            ("foot_length", self.foot_length),
            ("foot_width", self.foot_width),
            ("t_single_support", self.t_single_support),
            ("t_double_support", self.t_double_support),
            ("dt", self.dt),
            ("fall_radius", self.fall_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ModelError::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        let nonneg = [
            ("arm_link_mass", self.arm_link_mass),
            ("payload_mass", self.payload_mass),
            ("arm_damping", self.arm_damping),
            ("arm_coupling", self.arm_coupling),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ModelError::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Pendulum frequency omega = sqrt(g / z0), 1/s.
    pub fn omega(&self) -> f64 {
        (self.gravity / self.pendulum_height).sqrt()
    }

    /// Trunk plus both arms plus both payloads, kg.
    pub fn total_mass(&self) -> f64 {
        self.trunk_mass + 2.0 * (self.arm_link_mass + self.payload_mass)
    }

    /// Effective inertia of one arm about its shoulder, kg*m^2: link mass at
    /// half extension, payload at full extension.
    pub fn arm_inertia(&self) -> f64 {
        let l = self.upper_arm_length;
        self.arm_link_mass * (0.5 * l) * (0.5 * l) + self.payload_mass * l * l
    }

    /// Duration of one full stride (two footsteps), s.
    pub fn stride_period(&self) -> f64 {
        2.0 * (self.t_single_support + self.t_double_support)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub fn opposite(self) -> Foot {
        match self {
            Foot::Left => Foot::Right,
            Foot::Right => Foot::Left,
        }
    }

    /// +1 for the left side, -1 for the right; used to mirror y components.
    pub fn sign(self) -> f64 {
        match self {
            Foot::Left => 1.0,
            Foot::Right => -1.0,
        }
    }
}

/// Ground-plane pose of a foot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl PlanarPose {
    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// World coordinates of a point given in this pose's frame.
    pub fn to_world(&self, local: [f64; 2]) -> [f64; 2] {
        add2([self.x, self.y], rot2(self.yaw, local))
    }

    /// This pose's frame coordinates of a world point.
    pub fn to_local(&self, world: [f64; 2]) -> [f64; 2] {
        rot2(-self.yaw, sub2(world, [self.x, self.y]))
    }
}

/// One arm: q = [pitch, roll] in rad, qd in rad/s. Pitch is positive
/// forward, roll is positive outward (away from the trunk) on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmState {
    pub q: [f64; 2],
    pub qd: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Double,
    SingleLeft,
    SingleRight,
}

impl PhaseKind {
    /// Stance foot during single support.
    pub fn stance(self) -> Option<Foot> {
        match self {
            PhaseKind::SingleLeft => Some(Foot::Left),
            PhaseKind::SingleRight => Some(Foot::Right),
            PhaseKind::Double => None,
        }
    }
}

/// Where the walker is inside the current support phase; `fraction` runs
/// from 0 at phase entry to 1 at the transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportPhase {
    pub kind: PhaseKind,
    pub fraction: f64,
}

/// Full simulation state. The trunk CoM is the pendulum point; the total
/// CoM (with arms) is derived, see [`total_com`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub t: f64,
    /// Trunk CoM, horizontal components, m.
    pub com: [f64; 2],
    /// Trunk CoM velocity, m/s.
    pub vel: [f64; 2],
    /// Trunk yaw, rad.
    pub heading: f64,
    pub left_foot: PlanarPose,
    pub right_foot: PlanarPose,
    pub left_arm: ArmState,
    pub right_arm: ArmState,
    pub phase: SupportPhase,
    /// Foot that lifts off when the current/next double support ends.
    pub next_swing: Foot,
}

impl ReducedState {
    /// Canonical initial stance: feet side by side around the origin, trunk
    /// centered, arms at rest, double support about to load the left foot.
    pub fn initial(params: &ModelParams) -> Self {
        let half_w = 0.5 * params.step_width;
        Self {
            t: 0.0,
            com: [0.0, 0.0],
            vel: [0.0, 0.0],
            heading: 0.0,
            left_foot: PlanarPose { x: 0.0, y: half_w, yaw: 0.0 },
            right_foot: PlanarPose { x: 0.0, y: -half_w, yaw: 0.0 },
            left_arm: ArmState::default(),
            right_arm: ArmState::default(),
            phase: SupportPhase { kind: PhaseKind::Double, fraction: 0.0 },
            next_swing: Foot::Right,
        }
    }

    pub fn foot(&self, side: Foot) -> &PlanarPose {
        match side {
            Foot::Left => &self.left_foot,
            Foot::Right => &self.right_foot,
        }
    }

    pub fn arm(&self, side: Foot) -> &ArmState {
        match side {
            Foot::Left => &self.left_arm,
            Foot::Right => &self.right_arm,
        }
    }

    /// Arm joint angles in [`JOINT_ORDER`].
    pub fn arm_q(&self) -> [f64; 4] {
        [self.left_arm.q[0], self.left_arm.q[1], self.right_arm.q[0], self.right_arm.q[1]]
    }

    /// Arm joint rates in [`JOINT_ORDER`].
    pub fn arm_qd(&self) -> [f64; 4] {
        [self.left_arm.qd[0], self.left_arm.qd[1], self.right_arm.qd[0], self.right_arm.qd[1]]
    }

    fn is_finite(&self) -> bool {
        let mut vals = vec![
            self.t,
            self.com[0],
            self.com[1],
            self.vel[0],
            self.vel[1],
            self.heading,
            self.phase.fraction,
        ];
        for arm in [&self.left_arm, &self.right_arm] {
            vals.extend_from_slice(&arm.q);
            vals.extend_from_slice(&arm.qd);
        }
        vals.into_iter().all(f64::is_finite)
    }
}

/// Ground reaction sample for one foot. `fz` is the vertical force, N;
/// `tx`, `ty` are moments about the foot-frame x and y axes, N*m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrfSample {
    pub fz: f64,
    pub tx: f64,
    pub ty: f64,
    pub foot: PlanarPose,
}

/// Shoulder and tip of one arm in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPoints {
    pub shoulder: [f64; 3],
    pub tip: [f64; 3],
}

/// World-frame arm kinematics with tip partials, used by the dynamics.
struct ArmKin {
    points: ArmPoints,
    /// d(tip)/dq for q = [pitch, roll], world frame.
    dtip: [[f64; 3]; 2],
}

fn arm_kin(
    trunk_xy: [f64; 2],
    heading: f64,
    arm: &ArmState,
    side: Foot,
    params: &ModelParams,
) -> ArmKin {
    let sy = side.sign();
    let off = params.shoulder_offset;
    let l = params.upper_arm_length;
    let (sp, cp) = arm.q[0].sin_cos();
    let (sr, cr) = arm.q[1].sin_cos();

    // Trunk frame: x forward, y left, z up. Outward-positive roll mirrors
    // the y components between sides.
    let local = [l * sp, sy * l * cp * sr, -l * cp * cr];
    let dlocal_dpitch = [l * cp, -sy * l * sp * sr, l * sp * cr];
    let dlocal_droll = [0.0, sy * l * cp * cr, l * cp * sr];

    let sh_xy = add2(trunk_xy, rot2(heading, [off[0], sy * off[1]]));
    let shoulder = [sh_xy[0], sh_xy[1], params.pendulum_height + off[2]];

    let world = |v: [f64; 3]| -> [f64; 3] {
        let xy = rot2(heading, [v[0], v[1]]);
        [xy[0], xy[1], v[2]]
    };
    let tip = add3(shoulder, world(local));
    ArmKin {
        points: ArmPoints { shoulder, tip },
        dtip: [world(dlocal_dpitch), world(dlocal_droll)],
    }
}

/// World positions of one arm's shoulder and tip.
pub fn arm_forward_kinematics(
    state: &ReducedState,
    side: Foot,
    params: &ModelParams,
) -> ArmPoints {
    arm_kin(state.com, state.heading, state.arm(side), side, params).points
}

/// Mass-weighted CoM of trunk, arm links, and payloads, m.
pub fn total_com(state: &ReducedState, params: &ModelParams) -> Result<[f64; 3], ModelError> {
    let m_total = params.total_mass();
    if !(m_total > 0.0) {
        return Err(ModelError::ZeroMass);
    }
    let mut acc = scale3(
        [state.com[0], state.com[1], params.pendulum_height],
        params.trunk_mass,
    );
    for side in [Foot::Left, Foot::Right] {
        let pts = arm_forward_kinematics(state, side, params);
        let mid = scale3(add3(pts.shoulder, pts.tip), 0.5);
        acc = add3(acc, scale3(mid, params.arm_link_mass));
        acc = add3(acc, scale3(pts.tip, params.payload_mass));
    }
    Ok(scale3(acc, 1.0 / m_total))
}

/// Horizontal velocity of the total CoM, m/s.
pub fn total_com_velocity(state: &ReducedState, params: &ModelParams) -> [f64; 2] {
    let m_total = params.total_mass();
    let mut v = scale2(state.vel, params.trunk_mass);
    for side in [Foot::Left, Foot::Right] {
        let kin = arm_kin(state.com, state.heading, state.arm(side), side, params);
        let arm = state.arm(side);
        let rel = [
            kin.dtip[0][0] * arm.qd[0] + kin.dtip[1][0] * arm.qd[1],
            kin.dtip[0][1] * arm.qd[0] + kin.dtip[1][1] * arm.qd[1],
        ];
        let both = add2(state.vel, rel);
        let mid = add2(state.vel, scale2(rel, 0.5));
        v = add2(v, scale2(mid, params.arm_link_mass));
        v = add2(v, scale2(both, params.payload_mass));
    }
    scale2(v, 1.0 / m_total)
}

/// Nominal support schedule: double support, single left, double support,
/// single right, repeating. `t` is wrapped into the stride period.
pub fn support_phase(t: f64, params: &ModelParams) -> SupportPhase {
    assert!(t >= 0.0, "support_phase requires t >= 0");
    let ds = params.t_double_support;
    let ss = params.t_single_support;
    let period = params.stride_period();
    let mut s = t % period;
    let segments = [
        (ds, PhaseKind::Double),
        (ss, PhaseKind::SingleLeft),
        (ds, PhaseKind::Double),
        (ss, PhaseKind::SingleRight),
    ];
    for (len, kind) in segments {
        if s < len {
            return SupportPhase { kind, fraction: s / len };
        }
        s -= len;
    }
    // Only reachable through accumulated rounding at the period boundary.
    SupportPhase { kind: PhaseKind::Double, fraction: 0.0 }
}

/// Smoothstep weight-transfer profile: w(0) = 0, w(1) = 1, flat at both
/// ends so force rates stay continuous across phase transitions.
pub fn weight_transfer(fraction: f64) -> f64 {
    let f = fraction.clamp(0.0, 1.0);
    f * f * (3.0 - 2.0 * f)
}

/// Foot the load migrates away from / toward during the current double
/// support. During single support the stance foot carries everything.
fn double_support_split(state: &ReducedState) -> (Foot, Foot) {
    let from = state.next_swing;
    (from, from.opposite())
}

/// Support point the gait schedule alone would command: the stance foot
/// center in single support, the weight-transfer interpolation between the
/// outgoing and incoming foot centers in double support.
pub fn scheduled_zmp(state: &ReducedState) -> [f64; 2] {
    match state.phase.kind.stance() {
        Some(foot) => state.foot(foot).xy(),
        None => {
            let (from, to) = double_support_split(state);
            let w = weight_transfer(state.phase.fraction);
            add2(
                scale2(state.foot(from).xy(), 1.0 - w),
                scale2(state.foot(to).xy(), w),
            )
        }
    }
}

fn clamp_to_interval(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

/// Nearest point to `world` inside the foot rectangle, world coordinates.
fn clamp_to_foot(world: [f64; 2], foot: &PlanarPose, params: &ModelParams) -> [f64; 2] {
    let hx = 0.5 * params.foot_length;
    let hy = 0.5 * params.foot_width;
    let local = foot.to_local(world);
    foot.to_world([
        clamp_to_interval(local[0], -hx, hx),
        clamp_to_interval(local[1], -hy, hy),
    ])
}

fn grf_for(foot: &PlanarPose, fz: f64, cop_world: [f64; 2]) -> GrfSample {
    let local = foot.to_local(cop_world);
    GrfSample { fz, tx: fz * local[1], ty: -fz * local[0], foot: *foot }
}

fn zero_grf(foot: &PlanarPose) -> GrfSample {
    GrfSample { fz: 0.0, tx: 0.0, ty: 0.0, foot: *foot }
}

/// Splits `z = wa * a + wb * b` with `a`, `b` constrained to intervals.
/// Exact whenever `z` is inside the weighted Minkowski sum of the two
/// intervals; otherwise both ends saturate and the residual is dropped.
fn split_axis(z: f64, wa: f64, wb: f64, ca: f64, cb: f64, half: f64) -> (f64, f64) {
    let base = wa * ca + wb * cb;
    let d = z - base;
    let mut a = ca + d;
    let mut b = cb + d;
    if a < ca - half || a > ca + half {
        a = clamp_to_interval(a, ca - half, ca + half);
        b = (z - wa * a) / wb;
        b = clamp_to_interval(b, cb - half, cb + half);
    } else if b < cb - half || b > cb + half {
        b = clamp_to_interval(b, cb - half, cb + half);
        a = (z - wb * b) / wa;
        a = clamp_to_interval(a, ca - half, ca + half);
    }
    (a, b)
}

/// Synthesizes per-foot ground reaction from a commanded zero-moment point.
///
/// Vertical force always sums to total weight (no flight phase exists). In
/// single support the stance foot carries everything and its center of
/// pressure is the commanded point clamped into the foot rectangle. In
/// double support the vertical split follows [`weight_transfer`] and the
/// two centers of pressure are placed so their force-weighted mean
/// reproduces the command exactly whenever the split allows it; commands
/// outside the reachable region saturate at the foot edges.
pub fn synth_grf(
    state: &ReducedState,
    commanded_zmp: [f64; 2],
    params: &ModelParams,
) -> (GrfSample, GrfSample) {
    let weight = params.total_mass() * params.gravity;
    match state.phase.kind.stance() {
        Some(stance) => {
            let pose = state.foot(stance);
            let cop = clamp_to_foot(commanded_zmp, pose, params);
            let stance_grf = grf_for(pose, weight, cop);
            let swing = zero_grf(state.foot(stance.opposite()));
            match stance {
                Foot::Left => (stance_grf, swing),
                Foot::Right => (swing, stance_grf),
            }
        }
        None => {
            let (from, to) = double_support_split(state);
            let w = weight_transfer(state.phase.fraction);
            let fz_to = weight * w;
            let fz_from = weight - fz_to;

            // Degenerate split: all load on one foot, same as single support.
            let eps = balance::FZ_EPSILON;
            if fz_to <= eps || fz_from <= eps {
                let (stance, other) = if fz_to <= eps { (from, to) } else { (to, from) };
                let pose = state.foot(stance);
                let cop = clamp_to_foot(commanded_zmp, pose, params);
                let stance_grf = grf_for(pose, weight, cop);
                let swing = zero_grf(state.foot(other));
                return match stance {
                    Foot::Left => (stance_grf, swing),
                    Foot::Right => (swing, stance_grf),
                };
            }

            // Solve per axis in a frame where both rectangles are aligned.
            // Feet share their yaw in every gait this model produces; with
            // unequal yaws the decomposition is approximate and saturates.
            let frame = state.foot(from).yaw;
            let wa = fz_from / weight;
            let wb = fz_to / weight;
            let pa = rot2(-frame, state.foot(from).xy());
            let pb = rot2(-frame, state.foot(to).xy());
            let z = rot2(-frame, commanded_zmp);
            let hx = 0.5 * params.foot_length;
            let hy = 0.5 * params.foot_width;
            let (ax, bx) = split_axis(z[0], wa, wb, pa[0], pb[0], hx);
            let (ay, by) = split_axis(z[1], wa, wb, pa[1], pb[1], hy);
            let cop_from = rot2(frame, [ax, ay]);
            let cop_to = rot2(frame, [bx, by]);

            let g_from = grf_for(state.foot(from), fz_from, cop_from);
            let g_to = grf_for(state.foot(to), fz_to, cop_to);
            match from {
                Foot::Left => (g_from, g_to),
                Foot::Right => (g_to, g_from),
            }
        }
    }
}

/// Corner points of every foot in ground contact (both feet; the model has
/// no flight phase), as a convex hull in counterclockwise order.
pub fn support_polygon(state: &ReducedState, params: &ModelParams) -> Vec<[f64; 2]> {
    let hx = 0.5 * params.foot_length;
    let hy = 0.5 * params.foot_width;
    let mut pts = Vec::with_capacity(8);
    for pose in [&state.left_foot, &state.right_foot] {
        for corner in [[hx, hy], [hx, -hy], [-hx, hy], [-hx, -hy]] {
            pts.push(pose.to_world(corner));
        }
    }
    convex_hull(pts)
}

fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len() + 1);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Horizontal distance from `point` to the polygon; zero inside.
pub fn distance_to_polygon(point: [f64; 2], hull: &[[f64; 2]]) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => norm2(sub2(point, hull[0])),
        _ => {
            let mut inside = true;
            let mut min_d = f64::INFINITY;
            for i in 0..hull.len() {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                let ab = sub2(b, a);
                let ap = sub2(point, a);
                let cross = ab[0] * ap[1] - ab[1] * ap[0];
                if cross < 0.0 {
                    inside = false;
                }
                let len2 = dot2(ab, ab);
                let t = if len2 > 0.0 { (dot2(ap, ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
                let closest = add2(a, scale2(ab, t));
                min_d = min_d.min(norm2(sub2(point, closest)));
            }
            if inside {
                0.0
            } else {
                min_d
            }
        }
    }
}

/// Whether the total CoM has strayed farther than `fall_radius` from the
/// support polygon.
pub fn has_fallen(state: &ReducedState, params: &ModelParams) -> Result<bool, ModelError> {
    let com = total_com(state, params)?;
    let hull = support_polygon(state, params);
    Ok(distance_to_polygon([com[0], com[1]], &hull) > params.fall_radius)
}

/// Successor state plus the ground reaction and support point realized
/// during the step, for logging and analysis.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: ReducedState,
    pub left_grf: GrfSample,
    pub right_grf: GrfSample,
    /// Center of support the pendulum pivoted about this step, m.
    pub cos: [f64; 2],
    /// Zero-moment point commanded this step (schedule plus arm reaction,
    /// before foot-geometry clamping), m.
    pub commanded_zmp: [f64; 2],
}

/// Per-arm mass bookkeeping for the CoM shift and reaction terms.
struct ArmMassTerms {
    /// Arm-induced shift of the total CoM relative to the trunk, m.
    shift: [f64; 2],
    /// Rate of that shift from joint motion, m/s.
    shift_rate: [f64; 2],
    /// (mass, height, trunk-relative velocity) per lumped mass point.
    masses: Vec<(f64, f64, [f64; 2])>,
}

fn arm_mass_terms(
    com: [f64; 2],
    heading: f64,
    left: &ArmState,
    right: &ArmState,
    params: &ModelParams,
) -> ArmMassTerms {
    let m_total = params.total_mass();
    let mut shift = [0.0, 0.0];
    let mut shift_rate = [0.0, 0.0];
    let mut masses = Vec::with_capacity(4);
    for (side, arm) in [(Foot::Left, left), (Foot::Right, right)] {
        let kin = arm_kin(com, heading, arm, side, params);
        let rel_v = [
            kin.dtip[0][0] * arm.qd[0] + kin.dtip[1][0] * arm.qd[1],
            kin.dtip[0][1] * arm.qd[0] + kin.dtip[1][1] * arm.qd[1],
        ];
        let tip = kin.points.tip;
        let mid = scale3(add3(kin.points.shoulder, tip), 0.5);
        let link_off = sub2([mid[0], mid[1]], com);
        let tip_off = sub2([tip[0], tip[1]], com);
        shift = add2(shift, scale2(link_off, params.arm_link_mass));
        shift = add2(shift, scale2(tip_off, params.payload_mass));
        shift_rate = add2(shift_rate, scale2(rel_v, 0.5 * params.arm_link_mass));
        shift_rate = add2(shift_rate, scale2(rel_v, params.payload_mass));
        masses.push((params.arm_link_mass, mid[2], scale2(rel_v, 0.5)));
        masses.push((params.payload_mass, tip[2], rel_v));
    }
    ArmMassTerms {
        shift: scale2(shift, 1.0 / m_total),
        shift_rate: scale2(shift_rate, 1.0 / m_total),
        masses,
    }
}

/// Advances the walker by one `dt`.
///
/// Order within the step: arm joints integrate first (applied torque,
/// viscous damping, inertial back-drive from the pendulum), then the
/// commanded zero-moment point is formed from the gait schedule plus the
/// arm-reaction shift, ground reaction is synthesized against the foot
/// geometry, and the total CoM advances as a linear inverted pendulum about
/// the realized center of support. The trunk state is recovered by
/// subtracting the arm-induced CoM shift. Foot placement and phase
/// transitions happen last; `leg_command.timing_offset` stretches the
/// current single-support phase and `leg_command.target` is where the
/// swing foot lands.
pub fn step_dynamics(
    state: &ReducedState,
    leg_command: &FootstepCommand,
    arm_torques: [f64; 4],
    params: &ModelParams,
) -> Result<StepOutcome, ModelError> {
    let dt = params.dt;
    let omega2 = params.gravity / params.pendulum_height;
    let m_total = params.total_mass();
    if !(m_total > 0.0) {
        return Err(ModelError::ZeroMass);
    }

    let before = arm_mass_terms(state.com, state.heading, &state.left_arm, &state.right_arm, params);
    let com_total = add2(state.com, before.shift);
    let vel_total = add2(state.vel, before.shift_rate);

    // Trunk acceleration estimate for the arm back-drive; uses the schedule
    // support point, one step behind the realized one.
    let z_sched = scheduled_zmp(state);
    let accel_est = scale2(sub2(com_total, z_sched), omega2 * params.arm_coupling);

    // Arm joints: applied torque, inertial back-drive, viscous damping.
    let inertia = params.arm_inertia();
    let coupling_mass = 0.5 * params.arm_link_mass + params.payload_mass;
    let mut new_arms = [state.left_arm, state.right_arm];
    for (i, side) in [Foot::Left, Foot::Right].into_iter().enumerate() {
        let arm = state.arm(side);
        let kin = arm_kin(state.com, state.heading, arm, side, params);
        let mut next = *arm;
        for j in 0..2 {
            let mut tau = arm_torques[2 * i + j];
            if let Some(cap) = params.torque_limit {
                tau = tau.clamp(-cap, cap);
            }
            let back_drive =
                -coupling_mass * dot2(accel_est, [kin.dtip[j][0], kin.dtip[j][1]]);
            let qdd = if inertia > 1e-12 {
                (tau + back_drive - params.arm_damping * arm.qd[j]) / inertia
            } else {
                0.0
            };
            next.qd[j] = arm.qd[j] + dt * qdd;
        }
        next.q[0] = arm.q[0] + dt * next.qd[0];
        next.q[1] = arm.q[1] + dt * next.qd[1];
        new_arms[i] = next;
    }

    // Arm-mass accelerations shift the realized center of pressure: mass
    // above the pendulum height pushes it along the acceleration, mass
    // below pushes it against.
    let after = arm_mass_terms(state.com, state.heading, &new_arms[0], &new_arms[1], params);
    let mut reaction = [0.0, 0.0];
    for ((m, z, v_before), (_, _, v_after)) in before.masses.iter().zip(after.masses.iter()) {
        if *m <= 0.0 {
            continue;
        }
        let accel = scale2(sub2(*v_after, *v_before), 1.0 / dt);
        reaction = add2(reaction, scale2(accel, m * (z - params.pendulum_height)));
    }
    reaction = scale2(
        reaction,
        params.arm_coupling / (m_total * params.gravity),
    );
    let commanded_zmp = add2(z_sched, reaction);

    let (left_grf, right_grf) = synth_grf(state, commanded_zmp, params);
    let support = balance::estimate_cos(&left_grf, &right_grf, state.phase)?;

    // Linear inverted pendulum on the total CoM, semi-implicit Euler.
    let accel = scale2(sub2(com_total, support), omega2);
    let vel_total_next = add2(vel_total, scale2(accel, dt));
    let com_total_next = add2(com_total, scale2(vel_total_next, dt));

    let mut next = state.clone();
    next.left_arm = new_arms[0];
    next.right_arm = new_arms[1];
    // Trunk recovered from the total CoM; arm shift is re-evaluated at the
    // new joint angles so arm motion recoils the trunk.
    let shift_next = arm_mass_terms(state.com, state.heading, &new_arms[0], &new_arms[1], params);
    next.com = sub2(com_total_next, shift_next.shift);
    next.vel = sub2(vel_total_next, shift_next.shift_rate);
    next.t = state.t + dt;

    // Phase clock. The leg command may stretch the current single support.
    let duration = match state.phase.kind {
        PhaseKind::Double => params.t_double_support,
        _ => (params.t_single_support + leg_command.timing_offset)
            .max(0.25 * params.t_single_support),
    };
    let advanced = state.phase.fraction + dt / duration;
    if advanced < 1.0 {
        next.phase = SupportPhase { kind: state.phase.kind, fraction: advanced };
    } else {
        match state.phase.kind {
            PhaseKind::Double => {
                // Load transfer complete; the previous stance foot lifts.
                let stance = state.next_swing.opposite();
                let kind = match stance {
                    Foot::Left => PhaseKind::SingleLeft,
                    Foot::Right => PhaseKind::SingleRight,
                };
                let spill = (advanced - 1.0) * duration / params.t_single_support;
                next.phase = SupportPhase { kind, fraction: spill };
            }
            PhaseKind::SingleLeft | PhaseKind::SingleRight => {
                // Touchdown: the swing foot lands on the commanded target.
                let stance = state.phase.kind.stance().unwrap();
                let landing = stance.opposite();
                debug_assert_eq!(leg_command.foot, landing, "command addressed to stance foot");
                match landing {
                    Foot::Left => next.left_foot = leg_command.target,
                    Foot::Right => next.right_foot = leg_command.target,
                }
                next.next_swing = stance;
                let spill = (advanced - 1.0) * duration / params.t_double_support;
                next.phase = SupportPhase { kind: PhaseKind::Double, fraction: spill };
            }
        }
    }

    if !next.is_finite() {
        return Err(ModelError::Diverged { t: next.t });
    }
    Ok(StepOutcome {
        state: next,
        left_grf,
        right_grf,
        cos: support,
        commanded_zmp,
    })
}
