//! Run analysis: gait-similarity distance against a baseline run, per-cycle
//! stability statistics, the normalized mean recovery curve, and the
//! vertical-GRF phase-plane orientation error.

use serde::{Deserialize, Serialize};

use super::log::RunLog;
use super::HarnessError;
use crate::metrics::{
    average_cycles, comcos_series, dtw_distance, gcsm, orientation_error, pca_ellipse, quartiles,
    resample_cycle, segment_cycles, tukey_whiskers, MetricsError,
};

/// Number of phase points each cycle is resampled to (0-100% in 1% steps).
pub const RECOVERY_CURVE_POINTS: usize = 101;

/// Peak prominence threshold as a fraction of the CoM-CoS series range.
const PROMINENCE_FRACTION: f64 = 0.1;

/// Minimum peak separation as a fraction of the stride period.
const SEPARATION_FRACTION: f64 = 0.3;

/// Distribution summary of the per-cycle stability minima, m. Whiskers
/// follow the Tukey 1.5*IQR rule, clamped to observed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcsmStats {
    pub median: f64,
    pub mean: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub per_cycle: Vec<f64>,
}

/// Analysis of one run against a baseline run. Cycle-dependent fields are
/// `null` when fewer than two CoM-CoS peaks exist; the orientation error is
/// `null` when the GRF point cloud has no dominant direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Name of the analyzed run (scenario or file stem).
    pub scenario: String,
    /// Dynamic-time-warping distance between the 3-D CoM trajectories.
    pub dtw_to_baseline: f64,
    /// Number of peak-bounded CoM-CoS cycles found.
    pub cycle_count: usize,
    pub gcsm: Option<GcsmStats>,
    /// Folded angular distance of the (fz_left, fz_right) principal axis
    /// from the anti-phase diagonal, degrees.
    pub orientation_error: Option<f64>,
    /// Pointwise mean of the per-cycle CoM-CoS distance, each cycle
    /// resampled to [`RECOVERY_CURVE_POINTS`] phase points.
    pub mean_recovery_curve: Option<Vec<f64>>,
}

impl AnalysisReport {
    /// Serializes with a fixed field order and a trailing newline; the
    /// output is byte-stable for equal reports.
    pub fn to_json(&self) -> Result<String, HarnessError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Analyzes `run` against `baseline`. Both logs must share the same `dt`;
/// `stride_period` (s) sets the minimum peak separation used for cycle
/// segmentation.
pub fn analyze_run(
    name: &str,
    run: &RunLog,
    baseline: &RunLog,
    stride_period: f64,
) -> Result<AnalysisReport, HarnessError> {
    if run.dt != baseline.dt {
        return Err(HarnessError::DtMismatch(run.dt, baseline.dt));
    }
    let traj = run.to_trajectory();
    let base = baseline.to_trajectory();

    let dtw_to_baseline = dtw_distance(&traj.com, &base.com)?;

    let d = comcos_series(&traj)?;
    let range = {
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let min_separation = (SEPARATION_FRACTION * stride_period / run.dt).round() as usize;
    let (cycle_count, gcsm_stats, curve) =
        match segment_cycles(&d, PROMINENCE_FRACTION * range, min_separation) {
            Ok(cycles) => {
                let minima = gcsm(&d, &cycles)?;
                let mut sorted = minima.clone();
                sorted.sort_by(f64::total_cmp);
                let (q1, median, q3) = quartiles(&sorted)?;
                let mean = minima.iter().sum::<f64>() / minima.len() as f64;
                let (whisker_low, whisker_high) = tukey_whiskers(&sorted, q1, q3);
                let resampled = cycles
                    .iter()
                    .map(|&(i, j)| resample_cycle(&d[i..=j], RECOVERY_CURVE_POINTS))
                    .collect::<Result<Vec<_>, _>>()?;
                let (mean_curve, _std) = average_cycles(&resampled)?;
                let stats = GcsmStats {
                    median,
                    mean,
                    q1,
                    q3,
                    whisker_low,
                    whisker_high,
                    per_cycle: minima,
                };
                (cycles.len(), Some(stats), Some(mean_curve))
            }
            Err(MetricsError::InsufficientCycles { .. }) => (0, None, None),
            Err(e) => return Err(e.into()),
        };

    let orientation = match pca_ellipse(&traj.grf_fz) {
        Ok(ellipse) => Some(orientation_error(ellipse.angle_deg)),
        Err(MetricsError::OrientationUndefined) => None,
        Err(e) => return Err(e.into()),
    };

    Ok(AnalysisReport {
        scenario: name.to_string(),
        dtw_to_baseline,
        cycle_count,
        gcsm: gcsm_stats,
        orientation_error: orientation,
        mean_recovery_curve: curve,
    })
}
