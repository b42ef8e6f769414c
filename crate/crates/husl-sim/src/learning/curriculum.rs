//! Training curriculum: payload mass and arm pose difficulty ramp with
//! normalized training progress.

use serde::{Deserialize, Serialize};

use super::LearningError;

/// Difficulty schedule over normalized progress in [0, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurriculumSchedule {
    /// Progress values where the arm-pose stage increments. Must be
    /// increasing and inside (0, 1].
    pub stage_breakpoints: [f64; 4],
    /// Payload sampling range once the ramp completes, kg.
    pub payload_final: [f64; 2],
}

impl Default for CurriculumSchedule {
    fn default() -> Self {
        Self { stage_breakpoints: [0.2, 0.4, 0.6, 0.8], payload_final: [19.0, 30.0] }
    }
}

/// Difficulty at a given progress: the payload sampling range and the arm
/// pose stage (1 = neutral pose, 4 = full forward reach).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurriculumPhase {
    pub payload_range: [f64; 2],
    pub arm_stage: u8,
}

/// Evaluates the schedule. The payload range scales linearly from zero to
/// its final span over the ramp (completing at the last breakpoint); the
/// stage is one plus the number of breakpoints passed, capped at 4.
pub fn curriculum_at(
    progress: f64,
    schedule: &CurriculumSchedule,
) -> Result<CurriculumPhase, LearningError> {
    if !(0.0..=1.0).contains(&progress) {
        return Err(LearningError::InvalidProgress(progress));
    }
    let passed = schedule.stage_breakpoints.iter().filter(|&&b| b <= progress).count();
    let arm_stage = (1 + passed).min(4) as u8;
    let ramp_end = schedule.stage_breakpoints[3];
    let r = if ramp_end > 0.0 { (progress / ramp_end).min(1.0) } else { 1.0 };
    let payload_range = [schedule.payload_final[0] * r, schedule.payload_final[1] * r];
    Ok(CurriculumPhase { payload_range, arm_stage })
}

/// Arm pose held at a given stage: linear blend from the neutral pose to the
/// forward-reach pose, stage 1 mapping to neutral and stage 4 to full reach.
pub fn stage_arm_pose(stage: u8, neutral: [f64; 4], forward: [f64; 4]) -> [f64; 4] {
    let blend = (stage.clamp(1, 4) - 1) as f64 / 3.0;
    let mut q = [0.0; 4];
    for j in 0..4 {
        q[j] = neutral[j] + blend * (forward[j] - neutral[j]);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn starts_at_zero_payload_and_stage_one() {
        let phase = curriculum_at(0.0, &CurriculumSchedule::default()).unwrap();
        assert_eq!(phase.payload_range, [0.0, 0.0]);
        assert_eq!(phase.arm_stage, 1);
    }

    #[test]
    fn ends_at_full_payload_and_stage_four() {
        let phase = curriculum_at(1.0, &CurriculumSchedule::default()).unwrap();
        assert_eq!(phase.payload_range, [19.0, 30.0]);
        assert_eq!(phase.arm_stage, 4);
    }

    #[test]
    fn stage_increments_exactly_at_breakpoints() {
        let sched = CurriculumSchedule::default();
        let expect = [
            (0.0, 1),
            (0.19, 1),
            (0.2, 2),
            (0.39, 2),
            (0.4, 3),
            (0.6, 4),
            (0.79, 4),
            (0.8, 4),
            (1.0, 4),
        ];
        for (p, stage) in expect {
            assert_eq!(curriculum_at(p, &sched).unwrap().arm_stage, stage, "progress {p}");
        }
    }

    #[test]
    fn payload_range_is_monotone_in_progress() {
        let sched = CurriculumSchedule::default();
        let mut prev = [0.0, 0.0];
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let phase = curriculum_at(p, &sched).unwrap();
            assert!(phase.payload_range[0] >= prev[0] && phase.payload_range[1] >= prev[1]);
            assert!(phase.payload_range[0] <= phase.payload_range[1]);
            prev = phase.payload_range;
        }
    }

    #[test]
    fn ramp_completes_at_last_breakpoint() {
        let phase = curriculum_at(0.8, &CurriculumSchedule::default()).unwrap();
        assert_relative_eq!(phase.payload_range[0], 19.0, epsilon = 1e-12);
        assert_relative_eq!(phase.payload_range[1], 30.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_progress_is_rejected() {
        assert!(curriculum_at(-0.01, &CurriculumSchedule::default()).is_err());
        assert!(curriculum_at(1.01, &CurriculumSchedule::default()).is_err());
    }

    #[test]
    fn stage_pose_blends_between_endpoints() {
        let neutral = [0.4, 0.0, 0.4, 0.0];
        let forward = [1.2, 0.0, 1.2, 0.0];
        assert_eq!(stage_arm_pose(1, neutral, forward), neutral);
        assert_eq!(stage_arm_pose(4, neutral, forward), forward);
        let mid = stage_arm_pose(2, neutral, forward);
        assert_relative_eq!(mid[0], 0.4 + (1.2 - 0.4) / 3.0, epsilon = 1e-12);
    }
}
