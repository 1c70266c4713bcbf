//! Monte Carlo analysis: ROC/AUC construction, Neyman–Pearson threshold
//! calibration, Gaussian-approximation error rates, and the experiment engine
//! that compares detectors under the traffic models.

mod claims;
mod experiment;

pub use claims::{sweep_claims, ClaimRow, ConverseCell, SweepConfig, SweepOutcome};
pub use experiment::{
    compare_detectors, run_trials, run_trials_seq, score_moments, ComparisonReport,
    DetectorReport, ExperimentSpec, PairwiseDiff, ScenarioKind, ScoreMoments, TrialScores,
};

use crate::channel::ChannelError;
use crate::detect::DetectError;
use crate::flow::FlowError;
use crate::stats::normal_q;
use crate::traffic::TrafficError;
use crate::watermark::WatermarkError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("score lists must be non-empty")]
    EmptyScores,
    #[error("scores must not contain NaN")]
    NanScore,
    #[error("target FPR must lie strictly between 0 and 1, got {0}")]
    InvalidTargetFpr(f64),
    #[error("calibration needs ≥ {needed} H0 scores for target FPR {target_fpr}, got {got}")]
    CalibrationResolution { needed: usize, got: usize, target_fpr: f64 },
    #[error("no threshold in the H0 score set achieves FPR ≤ {target_fpr} (scores too heavily tied)")]
    CalibrationUnattainable { target_fpr: f64 },
    #[error("standard deviations must be positive and finite, got sigma0={sigma0}, sigma1={sigma1}")]
    InvalidSigma { sigma0: f64, sigma1: f64 },
    #[error("need at least {need} trials, got {got}")]
    TooFewTrials { need: usize, got: usize },
    #[error("detector {detector}: {count} of {total} trials degenerate (> 1% tolerated)")]
    DegenerateTrials { detector: String, count: usize, total: usize },
    #[error("detector {detector} produced no valid scores under {hypothesis}")]
    NoValidScores { detector: String, hypothesis: &'static str },
    #[error("trace scenarios need at least 2 flows")]
    TraceTooSmall,
    #[error("experiment spec invalid: {0}")]
    InvalidSpec(String),
    #[error("unknown detector name `{0}`")]
    UnknownDetector(String),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Watermark(#[from] WatermarkError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Empirical ROC curve plus its area. `points` runs from (0,0) to (1,1) with
/// both coordinates non-decreasing; `auc` is the Mann–Whitney statistic with
/// ties counted half, which the trapezoidal integral of `points` reproduces.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub n_h0: usize,
    pub n_h1: usize,
}

/// Builds the ROC by sweeping thresholds over the pooled score set (≥ decision
/// rule). ±∞ sentinel scores are legal and sort to the extremes; NaN is a
/// typed error.
pub fn roc(h0_scores: &[f64], h1_scores: &[f64]) -> Result<RocCurve, AnalysisError> {
    if h0_scores.is_empty() || h1_scores.is_empty() {
        return Err(AnalysisError::EmptyScores);
    }
    if h0_scores.iter().chain(h1_scores).any(|v| v.is_nan()) {
        return Err(AnalysisError::NanScore);
    }
    let mut h0 = h0_scores.to_vec();
    let mut h1 = h1_scores.to_vec();
    h0.sort_by(f64::total_cmp);
    h1.sort_by(f64::total_cmp);

    let auc = auc_sorted(&h0, &h1);

    // Threshold sweep from the largest pooled score downward.
    let n0 = h0.len() as f64;
    let n1 = h1.len() as f64;
    let mut points = vec![(0.0, 0.0)];
    let (mut i0, mut i1) = (h0.len(), h1.len()); // index of first element ≥ current threshold
    loop {
        // Next (lower) distinct threshold: the largest score below the ones
        // already swept.
        let below0 = if i0 > 0 { Some(h0[i0 - 1]) } else { None };
        let below1 = if i1 > 0 { Some(h1[i1 - 1]) } else { None };
        let t = match (below0, below1) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => break,
        };
        while i0 > 0 && h0[i0 - 1] >= t {
            i0 -= 1;
        }
        while i1 > 0 && h1[i1 - 1] >= t {
            i1 -= 1;
        }
        let fpr = (h0.len() - i0) as f64 / n0;
        let tpr = (h1.len() - i1) as f64 / n1;
        if points.last() != Some(&(fpr, tpr)) {
            points.push((fpr, tpr));
        }
    }
    debug_assert_eq!(points.last(), Some(&(1.0, 1.0)));

    Ok(RocCurve { points, auc, n_h0: h0_scores.len(), n_h1: h1_scores.len() })
}

/// Mann–Whitney AUC by groupwise counting over sorted inputs. Wins and ties
/// are accumulated as exact multiples of 0.5 in f64, so the result equals
/// brute-force pairwise counting bit for bit.
fn auc_sorted(h0: &[f64], h1: &[f64]) -> f64 {
    let mut contrib = 0.0f64;
    let mut i0 = 0usize;
    let mut eq_start = 0usize;
    let mut j = 0usize;
    while j < h1.len() {
        let v = h1[j];
        let mut group = 1usize;
        while j + group < h1.len() && h1[j + group] == v {
            group += 1;
        }
        while i0 < h0.len() && h0[i0] < v {
            i0 += 1;
        }
        eq_start = eq_start.max(i0);
        let mut eq_end = eq_start.max(i0);
        while eq_end < h0.len() && h0[eq_end] == v {
            eq_end += 1;
        }
        let less = i0;
        let ties = eq_end - i0;
        contrib += group as f64 * (less as f64 + 0.5 * ties as f64);
        j += group;
    }
    contrib / (h0.len() as f64 * h1.len() as f64)
}

/// Smallest score in the H0 set whose ≥-threshold false-positive fraction is
/// at most `target_fpr` (the empirical (1 − target_fpr) quantile, higher
/// interpolation). Requires enough samples to resolve the target.
pub fn calibrate_threshold(h0_scores: &[f64], target_fpr: f64) -> Result<f64, AnalysisError> {
    if !(target_fpr > 0.0 && target_fpr < 1.0) || target_fpr.is_nan() {
        return Err(AnalysisError::InvalidTargetFpr(target_fpr));
    }
    if h0_scores.iter().any(|v| v.is_nan()) {
        return Err(AnalysisError::NanScore);
    }
    let needed = (1.0 / target_fpr - 1e-9).ceil() as usize;
    if h0_scores.len() < needed {
        return Err(AnalysisError::CalibrationResolution {
            needed,
            got: h0_scores.len(),
            target_fpr,
        });
    }
    let mut sorted = h0_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // Walk distinct values from smallest up; the count of scores ≥ v shrinks,
    // so the first v satisfying the bound is the smallest valid threshold.
    let mut i = 0;
    while i < n {
        let v = sorted[i];
        let at_least = n - i;
        if at_least as f64 / n as f64 <= target_fpr {
            return Ok(v);
        }
        let mut j = i + 1;
        while j < n && sorted[j] == v {
            j += 1;
        }
        i = j;
    }
    Err(AnalysisError::CalibrationUnattainable { target_fpr })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMethod {
    MonteCarlo,
    GaussianApprox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRates {
    pub p_fa: f64,
    pub p_md: f64,
    pub threshold: f64,
    pub method: ErrorMethod,
}

/// CLT approximation of the error rates of a thresholded score:
/// p_fa = Q((t − μ0)/σ0) and p_md = Q((μ1 − t)/σ1) with Q the standard normal
/// upper tail (Cody erfc, ~1e-15 relative accuracy).
pub fn gaussian_error_approx(
    mu0: f64,
    sigma0: f64,
    mu1: f64,
    sigma1: f64,
    threshold: f64,
) -> Result<ErrorRates, AnalysisError> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) || !(sigma1 > 0.0 && sigma1.is_finite()) {
        return Err(AnalysisError::InvalidSigma { sigma0, sigma1 });
    }
    Ok(ErrorRates {
        p_fa: normal_q((threshold - mu0) / sigma0),
        p_md: normal_q((mu1 - threshold) / sigma1),
        threshold,
        method: ErrorMethod::GaussianApprox,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_auc(h0: &[f64], h1: &[f64]) -> f64 {
        let mut total = 0.0;
        for &s1 in h1 {
            for &s0 in h0 {
                if s1 > s0 {
                    total += 1.0;
                } else if s1 == s0 {
                    total += 0.5;
                }
            }
        }
        total / (h0.len() as f64 * h1.len() as f64)
    }

    #[test]
    fn roc_perfect_separation() {
        let curve = roc(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(curve.auc, 1.0);
        assert_eq!(curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn roc_identical_multisets_half() {
        let xs = [0.3, -0.2, 0.9, 0.3];
        let curve = roc(&xs, &xs).unwrap();
        assert_eq!(curve.auc, 0.5);
    }

    #[test]
    fn roc_enumerated_example() {
        let curve = roc(&[0.1, 0.4], &[0.3, 0.9]).unwrap();
        assert_eq!(curve.auc, 0.75);
    }

    #[test]
    fn auc_equals_brute_force_exactly() {
        let mut rng = crate::seed::rng_from(314);
        use rand::Rng;
        for trial in 0..20 {
            let n0 = rng.random_range(1..=50);
            let n1 = rng.random_range(1..=50);
            // Coarse grid forces plenty of ties; sprinkle infinities.
            let mut h0: Vec<f64> = (0..n0)
                .map(|_| (rng.random_range(-5..=5) as f64) / 2.0)
                .collect();
            let mut h1: Vec<f64> = (0..n1)
                .map(|_| (rng.random_range(-5..=5) as f64) / 2.0)
                .collect();
            if trial % 3 == 0 {
                h0.push(f64::NEG_INFINITY);
                h1.push(f64::INFINITY);
                h1.push(f64::NEG_INFINITY);
            }
            let curve = roc(&h0, &h1).unwrap();
            assert_eq!(curve.auc, brute_force_auc(&h0, &h1), "trial {trial}");
        }
    }

    #[test]
    fn roc_monotone_and_trapezoid_consistent() {
        let mut rng = crate::seed::rng_from(217);
        use rand::Rng;
        for _ in 0..10 {
            let h0: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
            let h1: Vec<f64> = (0..150).map(|_| rng.random::<f64>() + 0.3).collect();
            let curve = roc(&h0, &h1).unwrap();
            let mut trap = 0.0;
            for w in curve.points.windows(2) {
                let (f0, t0) = w[0];
                let (f1, t1) = w[1];
                assert!(f1 >= f0 && t1 >= t0, "non-monotone ROC");
                trap += (f1 - f0) * (t0 + t1) / 2.0;
            }
            assert!((trap - curve.auc).abs() < 1e-12, "trap {trap} vs auc {}", curve.auc);
        }
    }

    #[test]
    fn roc_rejects_bad_input() {
        assert!(roc(&[], &[1.0]).is_err());
        assert!(roc(&[1.0], &[f64::NAN]).is_err());
    }

    #[test]
    fn calibrate_enumerated_example() {
        let h0: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let thr = calibrate_threshold(&h0, 0.05).unwrap();
        assert_eq!(thr, 0.96);
        let achieved = h0.iter().filter(|&&s| s >= thr).count() as f64 / h0.len() as f64;
        assert!(achieved <= 0.05);
    }

    #[test]
    fn calibrate_median_for_half() {
        let h0: Vec<f64> = (-50..50).map(|i| i as f64).collect();
        let thr = calibrate_threshold(&h0, 0.5).unwrap();
        assert_eq!(thr, 0.0);
    }

    #[test]
    fn calibrate_resolution_guard() {
        let h0: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(matches!(
            calibrate_threshold(&h0, 1e-4),
            Err(AnalysisError::CalibrationResolution { needed: 10_000, .. })
        ));
    }

    #[test]
    fn calibrate_all_tied_unattainable() {
        let h0 = vec![0.5; 1000];
        assert!(matches!(
            calibrate_threshold(&h0, 0.01),
            Err(AnalysisError::CalibrationUnattainable { .. })
        ));
    }

    #[test]
    fn calibrate_achieves_target_on_random_sets() {
        let mut rng = crate::seed::rng_from(99);
        use rand::Rng;
        for _ in 0..20 {
            let h0: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
            for fpr in [0.01, 0.05, 0.25] {
                let thr = calibrate_threshold(&h0, fpr).unwrap();
                let achieved =
                    h0.iter().filter(|&&s| s >= thr).count() as f64 / h0.len() as f64;
                assert!(achieved <= fpr, "achieved {achieved} > {fpr}");
            }
        }
    }

    #[test]
    fn gaussian_approx_anchors() {
        let r = gaussian_error_approx(0.0, 1.0, 2.0, 1.0, 0.0).unwrap();
        assert_eq!(r.p_fa, 0.5);
        let r = gaussian_error_approx(0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(r.p_md, 0.5);
        let r = gaussian_error_approx(0.0, 1.0, 5.0, 1.0, 1.6448536269514722).unwrap();
        assert!((r.p_fa - 0.05).abs() < 1e-10);
        assert!(gaussian_error_approx(0.0, 0.0, 1.0, 1.0, 0.5).is_err());
    }
}
