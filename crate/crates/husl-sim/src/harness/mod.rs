//! Experiment orchestration: configuration files, scenario runs, trajectory
//! logs, analysis reports, and comparison tables.

mod analyze;
mod compare;
mod config;
mod log;
mod scenario;

pub use analyze::{analyze_run, AnalysisReport, GcsmStats};
pub use compare::compare_reports;
pub use config::{Config, GaitConfig, ScenarioConfig, ScenarioKind};
pub use log::{LogRow, RunLog};
pub use scenario::{run_scenario, RunStatus, ScenarioOutcome};

use crate::learning::LearningError;
use crate::metrics::MetricsError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("log format: {0}")]
    LogFormat(String),
    #[error("logs disagree on dt: {0} vs {1}")]
    DtMismatch(f64, f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
