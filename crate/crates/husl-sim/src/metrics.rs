//! Gait similarity and stability metrics.
//!
//! * Dynamic time warping between CoM trajectories (classic dynamic program,
//!   Euclidean local cost, no windowing or normalization).
//! * Per-cycle stability margin: the CoM-CoS distance D(t) is segmented at
//!   its peaks, and each cycle's margin is the minimum of D strictly between
//!   consecutive peaks (how far the walker recovered mid-cycle).
//! * Phase-plane geometry of the vertical ground-reaction pair: a PCA
//!   ellipse whose major-axis angle is compared against the 135 degree
//!   anti-phase diagonal.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("empty series")]
    EmptySeries,
    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples/points, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("found {found} peaks; at least 2 are needed to bound a cycle")]
    InsufficientCycles { found: usize },
    #[error("cycle [{0}, {1}] has no interior samples")]
    DegenerateCycle(usize, usize),
    #[error("point cloud has no dominant direction")]
    OrientationUndefined,
}

/// Logged run channels used by the metrics, one sample per `dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub com: Vec<[f64; 3]>,
    pub cos: Vec<[f64; 2]>,
    /// Vertical ground reaction per sample: [left fz, right fz], N.
    pub grf_fz: Vec<[f64; 2]>,
}

/// Dynamic time warping distance between two D-dimensional series:
/// minimum summed Euclidean cost over all monotone alignments.
pub fn dtw_distance<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> Result<f64, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let cost = |p: &[f64; D], q: &[f64; D]| -> f64 {
        let mut s = 0.0;
        for k in 0..D {
            let d = p[k] - q[k];
            s += d * d;
        }
        s.sqrt()
    };
    // Rolling rows: prev[j] = d(i-1, j), cur[j] = d(i, j).
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for i in 0..a.len() {
        for j in 0..m {
            let c = cost(&a[i], &b[j]);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { f64::INFINITY };
                let up = if i > 0 { prev[j] } else { f64::INFINITY };
                let left = if j > 0 { cur[j - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            cur[j] = c + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Horizontal CoM-to-CoS distance per sample, m.
pub fn comcos_series(traj: &Trajectory) -> Result<Vec<f64>, MetricsError> {
    if traj.com.len() != traj.cos.len() {
        return Err(MetricsError::LengthMismatch(traj.com.len(), traj.cos.len()));
    }
    Ok(traj
        .com
        .iter()
        .zip(traj.cos.iter())
        .map(|(c, s)| (c[0] - s[0]).hypot(c[1] - s[1]))
        .collect())
}

/// Topographic prominence of the local maximum at `i`: height above the
/// higher of the two valley floors separating it from taller terrain.
fn prominence(d: &[f64], i: usize) -> f64 {
    let peak = d[i];
    let mut left_min = peak;
    let mut k = i;
    while k > 0 {
        k -= 1;
        if d[k] > peak {
            break;
        }
        left_min = left_min.min(d[k]);
    }
    let mut right_min = peak;
    let mut k = i;
    while k + 1 < d.len() {
        k += 1;
        if d[k] > peak {
            break;
        }
        right_min = right_min.min(d[k]);
    }
    peak - left_min.max(right_min)
}

/// Indices of local maxima with at least `min_prominence` and pairwise
/// separation of at least `min_separation` samples. When two candidates sit
/// closer than the separation, the taller one wins.
pub fn find_peaks(d: &[f64], min_prominence: f64, min_separation: usize) -> Vec<usize> {
    let mut candidates = Vec::new();
    for i in 1..d.len().saturating_sub(1) {
        if d[i] > d[i - 1] && d[i] >= d[i + 1] && prominence(d, i) >= min_prominence {
            candidates.push(i);
        }
    }
    // Greedy by height, then enforce separation; ties break toward the
    // earlier index so the result is deterministic.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        d[candidates[b]]
            .total_cmp(&d[candidates[a]])
            .then(candidates[a].cmp(&candidates[b]))
    });
    let mut kept: Vec<usize> = Vec::new();
    for &oi in &order {
        let idx = candidates[oi];
        if kept.iter().all(|&k| k.abs_diff(idx) >= min_separation) {
            kept.push(idx);
        }
    }
    kept.sort_unstable();
    kept
}

/// Splits D(t) into cycles bounded by consecutive peaks.
pub fn segment_cycles(
    d: &[f64],
    min_prominence: f64,
    min_separation: usize,
) -> Result<Vec<(usize, usize)>, MetricsError> {
    let peaks = find_peaks(d, min_prominence, min_separation);
    if peaks.len() < 2 {
        return Err(MetricsError::InsufficientCycles { found: peaks.len() });
    }
    Ok(peaks.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Per-cycle stability margin: the minimum of D strictly inside each
/// peak-bounded cycle (endpoints excluded).
pub fn gcsm(d: &[f64], cycles: &[(usize, usize)]) -> Result<Vec<f64>, MetricsError> {
    cycles
        .iter()
        .map(|&(i, j)| {
            if j <= i + 1 {
                return Err(MetricsError::DegenerateCycle(i, j));
            }
            Ok(d[i + 1..j].iter().copied().fold(f64::INFINITY, f64::min))
        })
        .collect()
}

/// Linearly resamples a cycle onto `n` uniformly spaced phase points.
/// Both endpoints are reproduced exactly.
pub fn resample_cycle(segment: &[f64], n: usize) -> Result<Vec<f64>, MetricsError> {
    if segment.len() < 2 {
        return Err(MetricsError::TooFew { needed: 2, got: segment.len() });
    }
    if n < 2 {
        return Err(MetricsError::TooFew { needed: 2, got: n });
    }
    let last = segment.len() - 1;
    Ok((0..n)
        .map(|k| {
            let pos = (k * last) as f64 / (n - 1) as f64;
            let idx = pos.floor() as usize;
            if idx >= last {
                segment[last]
            } else {
                let t = pos - idx as f64;
                segment[idx] + t * (segment[idx + 1] - segment[idx])
            }
        })
        .collect())
}

/// Pointwise mean and population standard deviation across equal-length
/// resampled cycles.
pub fn average_cycles(cycles: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), MetricsError> {
    let first = cycles.first().ok_or(MetricsError::EmptySeries)?;
    let n = first.len();
    for c in cycles {
        if c.len() != n {
            return Err(MetricsError::LengthMismatch(n, c.len()));
        }
    }
    let count = cycles.len() as f64;
    let mut mean = vec![0.0; n];
    for c in cycles {
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= count;
    }
    let mut std = vec![0.0; n];
    for c in cycles {
        for ((s, v), m) in std.iter_mut().zip(c).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    for s in &mut std {
        *s = (*s / count).sqrt();
    }
    Ok((mean, std))
}

/// Best-fit ellipse of a 2-D point cloud from its covariance: center,
/// semi-axis lengths (sqrt of eigenvalues), and major-axis angle folded
/// into [0, 180) degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaEllipse {
    pub center: [f64; 2],
    pub axes: [f64; 2],
    pub angle_deg: f64,
}

pub fn pca_ellipse(points: &[[f64; 2]]) -> Result<PcaEllipse, MetricsError> {
    if points.len() < 3 {
        return Err(MetricsError::TooFew { needed: 3, got: points.len() });
    }
    let n = points.len() as f64;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for p in points {
        cx += p[0];
        cy += p[1];
    }
    cx /= n;
    cy /= n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let dx = p[0] - cx;
        let dy = p[1] - cy;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    sxx /= n;
    sxy /= n;
    syy /= n;

    let half_tr = 0.5 * (sxx + syy);
    let det_root = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let l1 = half_tr + det_root;
    let l2 = half_tr - det_root;
    if !(l1 > 0.0) || (l1 - l2) <= 1e-12 * l1 {
        // All points coincide, or the cloud is isotropic: no major axis.
        return Err(MetricsError::OrientationUndefined);
    }
    // Eigenvector of the dominant eigenvalue.
    let v = if sxy != 0.0 {
        [sxy, l1 - sxx]
    } else if sxx >= syy {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let angle_deg = v[1].atan2(v[0]).to_degrees().rem_euclid(180.0);
    Ok(PcaEllipse {
        center: [cx, cy],
        axes: [l1.sqrt(), l2.max(0.0).sqrt()],
        angle_deg,
    })
}

/// Acute deviation of a [0, 180) axis angle from the 135 degree anti-phase
/// diagonal, degrees in [0, 90].
pub fn orientation_error(angle_deg: f64) -> f64 {
    let d = (angle_deg - 135.0).rem_euclid(180.0);
    d.min(180.0 - d)
}

/// Interpolated quartiles (q1, median, q3) of a sample.
pub fn quartiles(xs: &[f64]) -> Result<(f64, f64, f64), MetricsError> {
    if xs.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |p: f64| -> f64 {
        let pos = p * (sorted.len() - 1) as f64;
        let idx = pos.floor() as usize;
        if idx + 1 >= sorted.len() {
            sorted[sorted.len() - 1]
        } else {
            let t = pos - idx as f64;
            sorted[idx] + t * (sorted[idx + 1] - sorted[idx])
        }
    };
    Ok((at(0.25), at(0.5), at(0.75)))
}

/// Tukey whiskers: the most extreme samples within 1.5 IQR of the quartiles.
pub fn tukey_whiskers(xs: &[f64], q1: f64, q3: f64) -> (f64, f64) {
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in xs {
        if x >= lo_fence && x < lo {
            lo = x;
        }
        if x <= hi_fence && x > hi {
            hi = x;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pts1(xs: &[f64]) -> Vec<[f64; 1]> {
        xs.iter().map(|&x| [x]).collect()
    }

    /// Exhaustive DTW over all monotone alignment paths; exponential, only
    /// usable for tiny inputs. Serves as the oracle for the DP version.
    pub(crate) fn dtw_exhaustive<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> f64 {
        fn cost<const D: usize>(p: &[f64; D], q: &[f64; D]) -> f64 {
            let mut s = 0.0;
            for k in 0..D {
                let d = p[k] - q[k];
                s += d * d;
            }
            s.sqrt()
        }
        fn rec<const D: usize>(a: &[[f64; D]], b: &[[f64; D]], i: usize, j: usize) -> f64 {
            let c = cost(&a[i], &b[j]);
            if i == 0 && j == 0 {
                return c;
            }
            let mut best = f64::INFINITY;
            if i > 0 {
                best = best.min(rec(a, b, i - 1, j));
            }
            if j > 0 {
                best = best.min(rec(a, b, i, j - 1));
            }
            if i > 0 && j > 0 {
                best = best.min(rec(a, b, i - 1, j - 1));
            }
            c + best
        }
        rec(a, b, a.len() - 1, b.len() - 1)
    }

    #[test]
    fn dtw_identical_series_is_zero() {
        let a = pts1(&[0.0, 1.0, 2.0, 1.0]);
        assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn dtw_single_samples_is_pointwise_distance() {
        let a = [[1.0, 2.0, 2.0]];
        let b = [[4.0, 6.0, 2.0]];
        assert_relative_eq!(dtw_distance(&a, &b).unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn dtw_known_warp() {
        // [0,0,1,2] vs [0,1,2]: the duplicated 0 aligns for free.
        let a = pts1(&[0.0, 0.0, 1.0, 2.0]);
        let b = pts1(&[0.0, 1.0, 2.0]);
        assert_eq!(dtw_distance(&a, &b).unwrap(), 0.0);
        let c = pts1(&[0.5, 1.0, 2.0]);
        assert_relative_eq!(dtw_distance(&a, &c).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dtw_empty_is_error() {
        let a = pts1(&[]);
        let b = pts1(&[1.0]);
        assert_eq!(dtw_distance(&a, &b).unwrap_err(), MetricsError::EmptySeries);
    }

    #[test]
    fn dtw_matches_exhaustive_enumeration_small() {
        let a = pts1(&[0.3, -0.6, 1.4, 0.9, 0.0]);
        let b = pts1(&[0.1, 0.8, -0.2, 1.1]);
        assert_relative_eq!(
            dtw_distance(&a, &b).unwrap(),
            dtw_exhaustive(&a, &b),
            epsilon = 1e-12
        );
    }

    #[test]
    fn dtw_is_symmetric() {
        let a = pts1(&[0.0, 0.4, 1.0, 0.2]);
        let b = pts1(&[0.3, 0.9, 0.1]);
        assert_eq!(dtw_distance(&a, &b).unwrap(), dtw_distance(&b, &a).unwrap());
    }

    #[test]
    fn peaks_found_with_prominence_and_separation() {
        // Peaks at 3 and 9; the bump at 5 has low prominence.
        let d = vec![0.0, 1.0, 2.0, 5.0, 2.0, 2.4, 1.8, 2.0, 3.0, 6.0, 1.0];
        let peaks = find_peaks(&d, 1.0, 2);
        assert_eq!(peaks, vec![3, 9]);
        // With no prominence threshold the 2.4 bump shows up too.
        let all = find_peaks(&d, 0.0, 1);
        assert_eq!(all, vec![3, 5, 9]);
    }

    #[test]
    fn close_peaks_resolve_to_the_taller_one() {
        let d = vec![0.0, 4.0, 3.9, 5.0, 0.0, 0.0, 0.0, 4.0, 0.0];
        let peaks = find_peaks(&d, 0.5, 4);
        assert_eq!(peaks, vec![3, 7]);
    }

    #[test]
    fn gcsm_recovers_interior_minima_exactly() {
        let d = vec![0.0, 5.0, 1.25, 0.75, 2.0, 6.0, 3.0, 0.5, 4.0, 5.5, 0.0];
        let cycles = segment_cycles(&d, 1.0, 2).unwrap();
        assert_eq!(cycles, vec![(1, 5), (5, 9)]);
        let margins = gcsm(&d, &cycles).unwrap();
        assert_eq!(margins, vec![0.75, 0.5]);
        // Margins never exceed their bounding peaks.
        for (&(i, j), &m) in cycles.iter().zip(&margins) {
            assert!(m <= d[i] && m <= d[j]);
        }
    }

    #[test]
    fn gcsm_excludes_cycle_endpoints() {
        // Interior minimum (3.0) is higher than both peak endpoints would
        // suggest if they leaked into the window.
        let d = vec![0.0, 2.0, 3.0, 4.0, 3.5, 5.0, 0.0];
        let cycles = vec![(1, 5)];
        let margins = gcsm(&d, &cycles).unwrap();
        assert_eq!(margins, vec![3.0]);
    }

    #[test]
    fn gcsm_degenerate_cycle_is_error() {
        let d = vec![0.0, 2.0, 3.0];
        assert_eq!(
            gcsm(&d, &[(1, 2)]).unwrap_err(),
            MetricsError::DegenerateCycle(1, 2)
        );
    }

    #[test]
    fn too_few_peaks_is_insufficient_cycles() {
        let d = vec![0.0, 1.0, 0.0];
        match segment_cycles(&d, 0.1, 1) {
            Err(MetricsError::InsufficientCycles { found }) => assert_eq!(found, 1),
            other => panic!("expected InsufficientCycles, got {other:?}"),
        }
    }

    #[test]
    fn resample_preserves_endpoints_exactly_and_interpolates() {
        let seg = vec![1.0, 3.0, 2.0, 8.0];
        let r = resample_cycle(&seg, 7).unwrap();
        assert_eq!(r[0], 1.0);
        assert_eq!(r[6], 8.0);
        assert_eq!(r.len(), 7);
        assert_relative_eq!(r[1], 2.0, epsilon = 1e-12); // pos 0.5 between 1 and 3
        assert_relative_eq!(r[3], 2.5, epsilon = 1e-12); // pos 1.5 between 3 and 2
        // Identity when n equals the segment length.
        assert_eq!(resample_cycle(&seg, 4).unwrap(), seg);
    }

    #[test]
    fn resample_constant_series_stays_constant() {
        let seg = vec![2.5; 10];
        for v in resample_cycle(&seg, 101).unwrap() {
            assert_eq!(v, 2.5);
        }
    }

    #[test]
    fn average_cycles_mean_and_dispersion() {
        let cycles = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]];
        let (mean, std) = average_cycles(&cycles).unwrap();
        assert_eq!(mean, vec![2.0, 2.0, 2.0]);
        assert_eq!(std, vec![1.0, 0.0, 1.0]);
        // A single cycle has zero dispersion.
        let (_, std1) = average_cycles(&cycles[..1].to_vec()).unwrap();
        assert_eq!(std1, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn pca_recovers_a_line_cloud() {
        let pts: Vec<[f64; 2]> = (0..50).map(|i| {
            let t = i as f64 * 0.1;
            [t, -t]
        }).collect();
        let e = pca_ellipse(&pts).unwrap();
        assert_relative_eq!(e.angle_deg, 135.0, epsilon = 1e-9);
        assert_relative_eq!(e.axes[1], 0.0, epsilon = 1e-9);
        assert_relative_eq!(orientation_error(e.angle_deg), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn pca_angle_folds_into_half_turn() {
        // A cloud along y = x gives 45 degrees whichever way it points.
        let pts: Vec<[f64; 2]> = (-25..25).map(|i| {
            let t = i as f64 * 0.1;
            [t, t + 0.0]
        }).collect();
        let e = pca_ellipse(&pts).unwrap();
        assert_relative_eq!(e.angle_deg, 45.0, epsilon = 1e-9);
        assert!((0.0..180.0).contains(&e.angle_deg));
    }

    #[test]
    fn pca_translation_and_scale_invariance_of_angle() {
        let pts: Vec<[f64; 2]> = (0..40)
            .map(|i| {
                let t = i as f64 * 0.25;
                [t + 0.3 * (t * 2.0).sin(), -t + 0.2 * (t * 3.0).cos()]
            })
            .collect();
        let base = pca_ellipse(&pts).unwrap();
        let moved: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + 123.0, p[1] - 45.0]).collect();
        let scaled: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] * 7.5, p[1] * 7.5]).collect();
        assert_relative_eq!(pca_ellipse(&moved).unwrap().angle_deg, base.angle_deg, epsilon = 1e-9);
        assert_relative_eq!(pca_ellipse(&scaled).unwrap().angle_deg, base.angle_deg, epsilon = 1e-9);
    }

    #[test]
    fn pca_isotropic_cloud_is_undefined() {
        // Four points on a circle: covariance is a multiple of identity.
        let pts = vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        assert_eq!(pca_ellipse(&pts).unwrap_err(), MetricsError::OrientationUndefined);
        let same = vec![[2.0, 2.0]; 5];
        assert_eq!(pca_ellipse(&same).unwrap_err(), MetricsError::OrientationUndefined);
    }

    #[test]
    fn pca_too_few_points_is_error() {
        let pts = vec![[0.0, 0.0], [1.0, 1.0]];
        assert!(matches!(pca_ellipse(&pts), Err(MetricsError::TooFew { .. })));
    }

    #[test]
    fn orientation_error_folds_to_acute_angle() {
        assert_relative_eq!(orientation_error(135.0), 0.0);
        assert_relative_eq!(orientation_error(90.0), 45.0);
        assert_relative_eq!(orientation_error(45.0), 90.0);
        assert_relative_eq!(orientation_error(170.0), 35.0);
        assert_relative_eq!(orientation_error(0.0), 45.0);
    }

    #[test]
    fn quartiles_interpolate() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        let (q1, med, q3) = quartiles(&xs).unwrap();
        assert_relative_eq!(q1, 1.75);
        assert_relative_eq!(med, 2.5);
        assert_relative_eq!(q3, 3.25);
    }

    #[test]
    fn whiskers_exclude_outliers() {
        let xs = vec![1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 100.0];
        let (q1, _, q3) = quartiles(&xs).unwrap();
        let (lo, hi) = tukey_whiskers(&xs, q1, q3);
        assert_eq!(lo, 1.0);
        assert_eq!(hi, 4.0);
    }
}
