//! Training environment: the walker tracks the reference gait while the
//! policy emits footstep residuals. Arms are PD-held at the curriculum
//! stage pose; the payload is resampled each episode from the curriculum
//! range. Falls terminate the episode.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::curriculum::{curriculum_at, stage_arm_pose, CurriculumSchedule};
use super::reward::{extract_features, reference_features, step_reward, RewardWeights};
use super::LearningError;
use crate::balance::{pd_torque, BalanceGains};
use crate::gait::{apply_residual, footstep_plan, reference_state, ReferenceMotion, ResidualBounds};
use crate::model::{
    has_fallen, scheduled_zmp, step_dynamics, total_com, total_com_velocity, ModelParams,
    PhaseKind, ReducedState,
};

/// Growth rate of the pendulum's divergent mode under the semi-implicit
/// integrator: the coordinate `com + vel / sigma` is multiplied by
/// `1 + sigma * dt` each physics step. Converges to omega as dt -> 0.
fn divergent_mode_rate(params: &ModelParams) -> f64 {
    let omega = params.omega();
    let h = 0.5 * omega * params.dt;
    omega * (h + (1.0 + h * h).sqrt())
}

/// Capture-point trajectory of the bounded open-loop walking solution,
/// sampled every physics step: entry `k` is the total-CoM capture point at
/// time `k * dt` on the one trajectory that follows the nominal footstep
/// plan without diverging.
///
/// Any other start diverges as `(1 + sigma * dt)^k`, which is why episodes
/// must begin on (or near) this trajectory for footstep residuals within
/// their clamps to be able to stabilize the gait. The pivot schedule is
/// recorded from a rollout with the arm coupling off (the pivot then equals
/// the scheduled support point exactly, independent of the diverging CoM),
/// and the bounded solution is recovered by running the divergent-mode
/// recursion backwards, which is contracting; a few strides of pivots past
/// the horizon wash out the end condition.
pub fn bounded_capture_orbit(model: &ModelParams, horizon: usize) -> Vec<[f64; 2]> {
    let mut params = model.clone();
    params.arm_coupling = 0.0;
    params.payload_mass = 0.0;

    let tail = (4.0 * params.stride_period() / params.dt).round() as usize;
    let steps = horizon + tail;
    let mut pivots = Vec::with_capacity(steps);
    let mut state = ReducedState::initial(&params);
    let mut index = 1u64;
    for _ in 0..steps {
        let cmd = footstep_plan(index, &params);
        let was_single = state.phase.kind.stance().is_some();
        let out = step_dynamics(&state, &cmd, [0.0; 4], &params)
            .expect("open-loop schedule rollout stays finite");
        if was_single && out.state.phase.kind == PhaseKind::Double {
            index += 1;
        }
        pivots.push(out.cos);
        state = out.state;
    }

    // Forward map of the divergent coordinate: xi[k+1] = lambda*xi[k] - c*p[k].
    // Backwards the recursion contracts by 1/lambda per step.
    let dt = params.dt;
    let omega2 = params.gravity / params.pendulum_height;
    let sigma = divergent_mode_rate(&params);
    let lambda = 1.0 + sigma * dt;
    let c = omega2 * dt * (dt + 1.0 / sigma);
    let mut orbit = vec![[0.0f64; 2]; steps + 1];
    orbit[steps] = *pivots.last().expect("nonzero horizon");
    for k in (0..steps).rev() {
        orbit[k] = [
            (orbit[k + 1][0] + c * pivots[k][0]) / lambda,
            (orbit[k + 1][1] + c * pivots[k][1]) / lambda,
        ];
    }
    orbit.truncate(horizon + 1);
    orbit
}

/// Wall-clock time at which the nominal (residual-free) schedule reaches the
/// walker's current point in the gait cycle. Timing residuals stretch or
/// shrink phases, so elapsed time drifts away from the schedule; the phase
/// bookkeeping (support kind, fraction, step in flight) identifies the
/// matching point on the nominal orbit regardless of that drift.
fn nominal_schedule_time(state: &ReducedState, footstep_index: u64, params: &ModelParams) -> f64 {
    let ds = params.t_double_support;
    let ss = params.t_single_support;
    let f = state.phase.fraction;
    // Strides are numbered by the step in flight: the right foot (odd plan
    // indices) flies during the first double support and the left-stance
    // single; the left foot (even) during the second pair of segments.
    let (stride, within) = match state.phase.kind {
        PhaseKind::Double if footstep_index % 2 == 1 => {
            (footstep_index.saturating_sub(1) / 2, f * ds)
        }
        PhaseKind::SingleLeft => (footstep_index.saturating_sub(1) / 2, ds + f * ss),
        PhaseKind::Double => (footstep_index.saturating_sub(2) / 2, ds + ss + f * ds),
        PhaseKind::SingleRight => (footstep_index.saturating_sub(2) / 2, ds + ss + ds + f * ss),
    };
    stride as f64 * params.stride_period() + within
}

pub const OBS_DIM: usize = 21;
pub const ACTION_DIM: usize = 3;

/// Scale on the capture-point deviation components of the observation.
/// Deviations the footstep clamps can still absorb are a few centimeters,
/// so this puts the decisive balance signal on the same O(1) footing as the
/// rest of the observation.
const CAPTURE_DEV_SCALE: f64 = 20.0;

/// Policy observation, shared by training and checkpoint playback. Layout:
/// support one-hot (3), phase fraction (1), total CoM error (2), total
/// velocity error (2), CoM minus scheduled ZMP (2), capture-point deviation
/// from the bounded walking orbit, scaled (2), arm angles (4), scaled arm
/// rates (4), normalized payload (1). Components are clamped to [-10, 10].
/// `orbit` is the lookup from [`bounded_capture_orbit`].
pub fn build_observation(
    state: &ReducedState,
    params: &ModelParams,
    motion: &ReferenceMotion,
    footstep_index: u64,
    orbit: &[[f64; 2]],
) -> Array1<f64> {
    let com = total_com(state, params).expect("validated params");
    let vel = total_com_velocity(state, params);
    let phase = state.t / motion.stride_period;
    let reference = reference_state(phase, motion);
    let zmp = scheduled_zmp(state);
    let sigma = divergent_mode_rate(params);
    let k = (nominal_schedule_time(state, footstep_index, params) / params.dt).round() as usize;
    let xi_ref = orbit[k.min(orbit.len() - 1)];
    let mut obs = Vec::with_capacity(OBS_DIM);
    obs.extend(match state.phase.kind {
        PhaseKind::Double => [1.0, 0.0, 0.0],
        PhaseKind::SingleLeft => [0.0, 1.0, 0.0],
        PhaseKind::SingleRight => [0.0, 0.0, 1.0],
    });
    obs.push(state.phase.fraction);
    obs.push(com[0] - reference.com[0]);
    obs.push(com[1] - reference.com[1]);
    obs.push(vel[0] - reference.vel[0]);
    obs.push(vel[1] - reference.vel[1]);
    obs.push(com[0] - zmp[0]);
    obs.push(com[1] - zmp[1]);
    obs.push(CAPTURE_DEV_SCALE * (com[0] + vel[0] / sigma - xi_ref[0]));
    obs.push(CAPTURE_DEV_SCALE * (com[1] + vel[1] / sigma - xi_ref[1]));
    obs.extend(state.arm_q());
    obs.extend(state.arm_qd().map(|v| 0.2 * v));
    obs.push(params.payload_mass / 30.0);
    debug_assert_eq!(obs.len(), OBS_DIM);
    Array1::from(obs.into_iter().map(|v| v.clamp(-10.0, 10.0)).collect::<Vec<_>>())
}

/// Everything the environment needs besides the seed.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub model: ModelParams,
    pub motion: ReferenceMotion,
    pub bounds: ResidualBounds,
    pub gains: BalanceGains,
    pub reward: RewardWeights,
    pub curriculum: CurriculumSchedule,
    /// Physics steps per control decision.
    pub control_substeps: usize,
    /// Truncation horizon in control steps.
    pub episode_max_steps: usize,
    /// Uniform perturbation scale on the initial trunk position (m); the
    /// velocity perturbation is this times omega.
    pub init_noise: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        let model = ModelParams::default();
        let motion = ReferenceMotion::from_params(&model, 0.03);
        Self {
            model,
            motion,
            bounds: ResidualBounds::default(),
            gains: BalanceGains::default(),
            reward: RewardWeights::default(),
            curriculum: CurriculumSchedule::default(),
            control_substeps: 50,
            episode_max_steps: 240,
            init_noise: 0.002,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub obs: Array1<f64>,
    pub reward: f64,
    pub done: bool,
    pub fell: bool,
}

pub struct WalkerEnv {
    cfg: EnvConfig,
    /// Episode parameters (payload resampled each reset).
    params: ModelParams,
    state: ReducedState,
    hold_pose: [f64; 4],
    /// Capture-point trajectory of the bounded open-loop walking solution;
    /// payload-independent, so computed once per environment.
    orbit: Vec<[f64; 2]>,
    /// Index of the next planned footstep the policy adjusts.
    footstep_index: u64,
    control_steps: usize,
    rng: ChaCha8Rng,
}

impl WalkerEnv {
    pub fn new(cfg: EnvConfig, seed: u64) -> Result<Self, LearningError> {
        cfg.model.validate().map_err(|e| LearningError::BadCheckpoint(e.to_string()))?;
        let params = cfg.model.clone();
        let state = ReducedState::initial(&params);
        // Twice the episode horizon: shortened single supports make the
        // nominal-schedule clock run ahead of elapsed time, by at most ~20%
        // under the timing-residual clamp.
        let horizon = 2 * cfg.episode_max_steps * cfg.control_substeps;
        let orbit = bounded_capture_orbit(&params, horizon);
        let mut env = Self {
            cfg,
            params,
            state,
            hold_pose: [0.0; 4],
            orbit,
            footstep_index: 1,
            control_steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        env.reset(0.0)?;
        Ok(env)
    }

    /// Starts a new episode at the given training progress. Payload mass is
    /// drawn from the curriculum range; arms start at (and are held at) the
    /// stage pose; the trunk is placed so the total CoM matches the
    /// reference start and the velocity puts the capture point on the
    /// bounded open-loop walking solution, then both are perturbed.
    pub fn reset(&mut self, progress: f64) -> Result<Array1<f64>, LearningError> {
        let phase = curriculum_at(progress, &self.cfg.curriculum)?;
        let [lo, hi] = phase.payload_range;
        let payload = lo + (hi - lo) * self.rng.random::<f64>();
        self.params = self.cfg.model.clone();
        self.params.payload_mass = payload;
        self.hold_pose =
            stage_arm_pose(phase.arm_stage, self.cfg.gains.q_base, self.cfg.gains.static_pose);

        let mut state = ReducedState::initial(&self.params);
        for (arm, side) in [(&mut state.left_arm, 0), (&mut state.right_arm, 2)] {
            arm.q = [self.hold_pose[side], self.hold_pose[side + 1]];
            arm.qd = [0.0, 0.0];
        }
        // With the trunk at the origin the total CoM reads off the arm mass
        // shift; placing the trunk at minus that shift puts the total CoM on
        // the reference start. The arms are at rest, so the trunk velocity
        // equals the total-CoM velocity, chosen to start the divergent
        // pendulum mode on the bounded solution rather than at the kinematic
        // reference velocity (which is several cm off in capture-point terms
        // and would outrun the residual clamps before the first landing).
        let shift = total_com(&state, &self.params).expect("validated params");
        let start = reference_state(0.0, &self.cfg.motion);
        state.com = [start.com[0] - shift[0], start.com[1] - shift[1]];
        let sigma = divergent_mode_rate(&self.params);
        state.vel = [
            sigma * (self.start_capture_point[0] - start.com[0]),
            sigma * (self.start_capture_point[1] - start.com[1]),
        ];
        let noise = self.cfg.init_noise;
        let omega = self.params.omega();
        // Always draw four values so the rng stream does not depend on the
        // noise setting.
        let draws: [f64; 4] = std::array::from_fn(|_| 2.0 * self.rng.random::<f64>() - 1.0);
        state.com[0] += noise * draws[0];
        state.com[1] += noise * draws[1];
        state.vel[0] += noise * omega * draws[2];
        state.vel[1] += noise * omega * draws[3];

        self.state = state;
        self.footstep_index = 1;
        self.control_steps = 0;
        Ok(self.observe())
    }

    /// Advances one control step. `action` is the footstep residual in
    /// bound-normalized units: each component is scaled by its clamp bound,
    /// so the policy works on an O(1) scale.
    pub fn step(&mut self, action: [f64; 3]) -> StepResult {
        let scaled = [
            action[0] * self.cfg.bounds.max_dx,
            action[1] * self.cfg.bounds.max_dy,
            action[2] * self.cfg.bounds.max_dt,
        ];
        let nominal = footstep_plan(self.footstep_index, &self.params);
        let cmd = apply_residual(&nominal, scaled, &self.cfg.bounds);

        let mut fell = false;
        for _ in 0..self.cfg.control_substeps {
            let q = self.state.arm_q();
            let qd = self.state.arm_qd();
            let tau = pd_torque(&self.cfg.gains, self.hold_pose, q, qd);
            let was_single = matches!(
                self.state.phase.kind,
                PhaseKind::SingleLeft | PhaseKind::SingleRight
            );
            match step_dynamics(&self.state, &cmd, tau, &self.params) {
                Ok(out) => {
                    if was_single && out.state.phase.kind == PhaseKind::Double {
                        self.footstep_index += 1;
                    }
                    self.state = out.state;
                }
                Err(_) => {
                    // Numerical blowup counts as a fall; keep the last
                    // finite state for the observation.
                    fell = true;
                    break;
                }
            }
            if has_fallen(&self.state, &self.params).unwrap_or(true) {
                fell = true;
                break;
            }
        }
        self.control_steps += 1;

        let com = total_com(&self.state, &self.params).expect("validated params");
        let vel = total_com_velocity(&self.state, &self.params);
        let f = extract_features(&self.state, [com[0], com[1]], vel);
        let phase = self.state.t / self.cfg.motion.stride_period;
        let f_ref = reference_features(&reference_state(phase, &self.cfg.motion));
        let reward =
            step_reward(&f, &f_ref, &self.cfg.reward, fell).expect("feature dims are fixed");

        let done = fell || self.control_steps >= self.cfg.episode_max_steps;
        StepResult { obs: self.observe(), reward, done, fell }
    }

    pub fn observe(&self) -> Array1<f64> {
        build_observation(&self.state, &self.params, &self.cfg.motion, self.footstep_index)
    }

    pub fn payload(&self) -> f64 {
        self.params.payload_mass
    }

    pub fn state(&self) -> &ReducedState {
        &self.state
    }

    pub fn control_steps(&self) -> usize {
        self.control_steps
    }
}
