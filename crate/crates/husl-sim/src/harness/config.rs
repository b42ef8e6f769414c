//! Single-document JSON configuration with `model`, `gait`, `balance`,
//! `learning`, and `scenario` sections. Unknown keys are rejected so typos
//! fail fast; every field has a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::balance::{BalanceGains, ControlMode};
use crate::gait::{ReferenceMotion, ResidualBounds};
use crate::learning::LearningConfig;
use crate::model::ModelParams;

/// Reference-motion and residual-bound parameters.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitConfig {
    pub reference: ReferenceMotion,
    pub bounds: ResidualBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Walker without the arm backpack: arm masses removed, gait only.
    Baseline,
    /// Arms and payload present, PD-held at the fixed forward pose.
    StaticPayload,
    /// Balance law drives the arm targets from the stability offset.
    DynamicBalancing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    /// Trial length, s.
    pub duration: f64,
    /// Carried payload, kg. Forced to zero for the baseline scenario.
    pub payload_mass: f64,
    /// Optional trained-policy checkpoint; without it a deterministic
    /// capture-point regulator supplies the footstep residuals.
    pub policy: Option<PathBuf>,
    /// Default output path for the trajectory log.
    pub output: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Baseline,
            seed: 0,
            duration: 10.0,
            payload_mass: 24.0,
            policy: None,
            output: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelParams,
    pub gait: GaitConfig,
    pub balance: BalanceGains,
    pub learning: LearningConfig,
    pub scenario: ScenarioConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Config =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.model.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if !(self.scenario.duration > 0.0) {
            return Err(HarnessError::Config("scenario.duration must be > 0".into()));
        }
        if self.scenario.payload_mass < 0.0 {
            return Err(HarnessError::Config("scenario.payload_mass must be >= 0".into()));
        }
        if self.learning.minibatch_size == 0 || self.learning.rollout_steps == 0 {
            return Err(HarnessError::Config("learning batch sizes must be positive".into()));
        }
        if self.gait.reference.stride_period <= 0.0 {
            return Err(HarnessError::Config("gait.reference.stride_period must be > 0".into()));
        }
        Ok(())
    }

    /// Hash of the canonical JSON serialization, truncated to 16 hex chars.
    /// Field order is fixed by the struct definitions, so equal configs
    /// hash equally regardless of input formatting.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    pub fn control_mode(&self) -> ControlMode {
        match self.scenario.scenario {
            ScenarioKind::Baseline => ControlMode::Baseline,
            ScenarioKind::StaticPayload => ControlMode::StaticHold,
            ScenarioKind::DynamicBalancing => ControlMode::DynamicBalance,
        }
    }

    /// Model parameters with the scenario wiring applied: the payload rides
    /// along for the arm scenarios; the baseline walker carries no arm
    /// bodies at all.
    pub fn scenario_params(&self) -> ModelParams {
        let mut params = self.model.clone();
        match self.scenario.scenario {
            ScenarioKind::Baseline => {
                params.arm_link_mass = 0.0;
                params.payload_mass = 0.0;
            }
            _ => params.payload_mass = self.scenario.payload_mass,
        }
        params
    }

    /// Reference motion consistent with the scenario model's timing.
    pub fn motion(&self) -> ReferenceMotion {
        self.gait.reference.clone()
    }

    pub fn bounds(&self) -> ResidualBounds {
        self.gait.bounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_and_validates() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: Config = serde_json::from_str(&text).unwrap();
        assert_eq!(back.config_hash(), cfg.config_hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<Config>(r#"{"model":{"trunk_masss":47.0}}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<Config>(r#"{"extra_section":{}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn missing_sections_fall_back_to_defaults() {
        let cfg: Config = serde_json::from_str(r#"{"scenario":{"seed":3}}"#).unwrap();
        assert_eq!(cfg.scenario.seed, 3);
        assert_eq!(cfg.scenario.duration, 10.0);
        assert_eq!(cfg.model.trunk_mass, 47.0);
    }

    #[test]
    fn hash_ignores_formatting_but_not_values() {
        let a: Config = serde_json::from_str(r#"{"scenario":{"seed":1}}"#).unwrap();
        let b: Config = serde_json::from_str(r#"{ "scenario" : { "seed" : 1 } }"#).unwrap();
        let c: Config = serde_json::from_str(r#"{"scenario":{"seed":2}}"#).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 16);
    }

    #[test]
    fn baseline_strips_arm_bodies() {
        let mut cfg = Config::default();
        cfg.scenario.scenario = ScenarioKind::Baseline;
        cfg.scenario.payload_mass = 24.0;
        let params = cfg.scenario_params();
        assert_eq!(params.arm_link_mass, 0.0);
        assert_eq!(params.payload_mass, 0.0);
        cfg.scenario.scenario = ScenarioKind::StaticPayload;
        let params = cfg.scenario_params();
        assert_eq!(params.arm_link_mass, 4.0);
        assert_eq!(params.payload_mass, 24.0);
    }

    #[test]
    fn zero_duration_fails_validation() {
        let mut cfg = Config::default();
        cfg.scenario.duration = 0.0;
        assert!(cfg.validate().is_err());
    }
}
