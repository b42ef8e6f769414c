//! Cross-run comparison tables built from analysis reports.
//!
//! Lays out the headline metrics of each run side by side, followed by the
//! pairwise percentage differences between runs. Formatting is fixed-width
//! and fully determined by the inputs, so stored tables are diff-friendly
//! and byte-stable across runs.

use super::analyze::AnalysisReport;
use super::HarnessError;

const HEADERS: [&str; 3] = ["dtw_to_baseline", "gcsm_median", "orientation_error"];

fn metric(report: &AnalysisReport, column: usize) -> Option<f64> {
    match column {
        0 => Some(report.dtw_to_baseline),
        1 => report.gcsm.as_ref().map(|g| g.median),
        _ => report.orientation_error,
    }
}

fn format_metric(column: usize, value: f64) -> String {
    match column {
        0 => format!("{value:.4}"),
        1 => format!("{value:.6}"),
        _ => format!("{value:.3}"),
    }
}

/// Percentage change of `b` relative to `a`, or `None` when either value is
/// unavailable or `a` is zero (the relative change is undefined there).
fn percent_diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if a != 0.0 => Some((b - a) / a.abs() * 100.0),
        _ => None,
    }
}

/// Render a comparison table for two or more named analysis reports.
///
/// The first block lists each run's metrics; the second lists, for every
/// ordered pair (later run vs earlier run), the percentage change of each
/// metric. Cells without a defined value read `n/a`.
pub fn compare_reports(reports: &[AnalysisReport]) -> Result<String, HarnessError> {
    if reports.len() < 2 {
        return Err(HarnessError::Config(
            "comparison needs at least two reports".into(),
        ));
    }

    let metric_rows: Vec<(String, [String; 3])> = reports
        .iter()
        .map(|r| {
            let cells = std::array::from_fn(|c| {
                metric(r, c).map_or_else(|| "n/a".into(), |v| format_metric(c, v))
            });
            (r.scenario.clone(), cells)
        })
        .collect();

    let mut diff_rows: Vec<(String, [String; 3])> = Vec::new();
    for i in 0..reports.len() {
        for j in (i + 1)..reports.len() {
            let name = format!("{} vs {}", reports[j].scenario, reports[i].scenario);
            let cells = std::array::from_fn(|c| {
                percent_diff(metric(&reports[i], c), metric(&reports[j], c))
                    .map_or_else(|| "n/a".into(), |v| format!("{v:+.1}%"))
            });
            diff_rows.push((name, cells));
        }
    }

    let name_width = ["scenario", "pair"]
        .into_iter()
        .map(str::len)
        .chain(metric_rows.iter().map(|(n, _)| n.len()))
        .chain(diff_rows.iter().map(|(n, _)| n.len()))
        .max()
        .unwrap_or(0);
    let col_width: [usize; 3] = std::array::from_fn(|c| {
        HEADERS[c]
            .len()
            .max(
                metric_rows
                    .iter()
                    .chain(diff_rows.iter())
                    .map(|(_, cells)| cells[c].len())
                    .max()
                    .unwrap_or(0),
            )
    });

    let render_row = |name: &str, cells: &[String; 3]| {
        let mut line = format!("{name:<name_width$}");
        for c in 0..3 {
            line.push_str(&format!("  {:>width$}", cells[c], width = col_width[c]));
        }
        line.push('\n');
        line
    };
    let header_cells: [String; 3] = std::array::from_fn(|c| HEADERS[c].to_string());

    let mut out = String::new();
    out.push_str(&render_row("scenario", &header_cells));
    for (name, cells) in &metric_rows {
        out.push_str(&render_row(name, cells));
    }
    out.push('\n');
    out.push_str(&render_row("pair", &header_cells));
    for (name, cells) in &diff_rows {
        out.push_str(&render_row(name, cells));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::analyze::GcsmStats;

    fn report(name: &str, dtw: f64, gcsm_median: Option<f64>, orient: Option<f64>) -> AnalysisReport {
        AnalysisReport {
            scenario: name.to_string(),
            dtw_to_baseline: dtw,
            cycle_count: 5,
            gcsm: gcsm_median.map(|m| GcsmStats {
                median: m,
                mean: m,
                q1: m,
                q3: m,
                whisker_low: m,
                whisker_high: m,
                per_cycle: vec![m],
            }),
            orientation_error: orient,
            mean_recovery_curve: None,
        }
    }

    #[test]
    fn fewer_than_two_reports_is_an_error() {
        let r = report("solo", 1.0, Some(0.1), Some(5.0));
        assert!(compare_reports(&[r]).is_err());
        assert!(compare_reports(&[]).is_err());
    }

    #[test]
    fn relative_reduction_matches_headline_percentages() {
        let reports = [
            report("baseline", 0.0, Some(0.004), Some(3.0)),
            report("static", 123.71, Some(0.008), Some(20.0)),
            report("dynamic", 65.54, Some(0.005), Some(8.0)),
        ];
        let table = compare_reports(&reports).unwrap();
        // (65.54 - 123.71) / 123.71 = a reduction of about 47%.
        assert!(table.contains("dynamic vs static"), "{table}");
        let line = table
            .lines()
            .find(|l| l.starts_with("dynamic vs static"))
            .unwrap();
        assert!(line.contains("-47.0%"), "{line}");
        // Relative change from a zero baseline value is undefined.
        let line = table
            .lines()
            .find(|l| l.starts_with("static vs baseline"))
            .unwrap();
        assert!(line.contains("n/a"), "{line}");
    }

    #[test]
    fn identical_reports_show_zero_differences() {
        let a = report("first", 10.0, Some(0.02), Some(12.0));
        let b = report("second", 10.0, Some(0.02), Some(12.0));
        let table = compare_reports(&[a, b]).unwrap();
        let line = table
            .lines()
            .find(|l| l.starts_with("second vs first"))
            .unwrap();
        assert_eq!(line.matches("+0.0%").count(), 3, "{line}");
    }

    #[test]
    fn missing_metrics_render_as_unavailable_without_failing() {
        let a = report("full", 10.0, Some(0.02), Some(12.0));
        let b = report("partial", 12.0, None, None);
        let table = compare_reports(&[a, b]).unwrap();
        let line = table.lines().find(|l| l.starts_with("partial")).unwrap();
        assert_eq!(line.matches("n/a").count(), 2, "{line}");
        let line = table
            .lines()
            .find(|l| l.starts_with("partial vs full"))
            .unwrap();
        assert!(line.contains("+20.0%"), "{line}");
        assert_eq!(line.matches("n/a").count(), 2, "{line}");
    }

    #[test]
    fn rendering_is_byte_stable_with_locked_layout() {
        let reports = [
            report("baseline", 0.0, None, Some(1.0)),
            report("dynamic", 65.54, Some(0.005), None),
        ];
        let first = compare_reports(&reports).unwrap();
        let second = compare_reports(&reports).unwrap();
        assert_eq!(first, second);
        let expected = "scenario             dtw_to_baseline  gcsm_median  orientation_error\n\
                        baseline                      0.0000          n/a              1.000\n\
                        dynamic                      65.5400     0.005000                n/a\n\
                        \n\
                        pair                 dtw_to_baseline  gcsm_median  orientation_error\n\
                        dynamic vs baseline              n/a          n/a                n/a\n";
        assert_eq!(first, expected);
    }
}
