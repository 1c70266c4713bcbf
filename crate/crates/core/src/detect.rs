//! Detectors: passive correlation and likelihood-ratio baselines, and the
//! non-blind watermark detectors (SLCorr and the model-A LRT).
//!
//! Scores are compared against calibrated thresholds with a ≥ tie rule.
//! Correlation-family scores live in [−1, 1]; LLR scores are unbounded and may
//! legitimately be ±∞ (an observation impossible under one hypothesis), which
//! sorts correctly in ROC construction. Degenerate inputs produce typed
//! errors, never NaN.

use crate::channel::{h0_difference_density, Density, JitterDist, JitterModel};
use crate::flow::{aligned, IpdVector};
use crate::watermark::WatermarkRecord;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least {need} aligned samples, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("degenerate input: {0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("record carries no watermark; non-blind detection needs one")]
    MissingWatermark,
    #[error("zero-scale jitter makes the H1 likelihood degenerate for non-identical observations")]
    DegenerateJitter,
    #[error("rate lambda must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("observation impossible under both hypotheses; likelihood ratio undefined")]
    UndefinedLikelihood,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionScore {
    pub value: f64,
    pub detector_name: &'static str,
    /// Number of IPD positions that entered the statistic.
    pub n_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub linked: bool,
    pub score: DetectionScore,
    pub threshold: f64,
}

/// Pearson correlation of two equal-length vectors. Errors on mismatched
/// lengths, fewer than two samples, or a zero-variance side; the result is
/// clamped to [−1, 1] against last-bit rounding excursions.
pub fn normalized_correlation(x: &IpdVector, y: &IpdVector) -> Result<f64, DetectError> {
    correlation_slices(x.as_slice(), y.as_slice())
}

fn correlation_slices(x: &[f64], y: &[f64]) -> Result<f64, DetectError> {
    if x.len() != y.len() {
        return Err(DetectError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 2 {
        return Err(DetectError::TooShort { need: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(DetectError::ZeroVariance("first input"));
    }
    if syy == 0.0 {
        return Err(DetectError::ZeroVariance("second input"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Passive baseline: correlate incoming and outgoing IPDs directly.
pub fn detect_passive(in_ipds: &IpdVector, out_ipds: &IpdVector) -> Result<DetectionScore, DetectError> {
    let (a, b) = aligned(in_ipds.as_slice(), out_ipds.as_slice())
        .map_err(|_| DetectError::TooShort { need: 2, got: 0 })?;
    let value = correlation_slices(a, b)?;
    Ok(DetectionScore { value, detector_name: "PassiveCorr", n_used: a.len() })
}

/// Signed sum of per-term log-likelihood differences with explicit ±∞
/// bookkeeping: a term impossible under H0 only pushes the sum to +∞, under H1
/// only to −∞; impossible under both (or both infinities arising) is a typed
/// error rather than NaN.
fn sum_llr(terms: impl Iterator<Item = (f64, f64)>) -> Result<f64, DetectError> {
    let mut finite = 0.0;
    let mut pos_inf = false;
    let mut neg_inf = false;
    for (lp1, lp0) in terms {
        match (lp1 == f64::NEG_INFINITY, lp0 == f64::NEG_INFINITY) {
            (true, true) => return Err(DetectError::UndefinedLikelihood),
            (true, false) => neg_inf = true,
            (false, true) => pos_inf = true,
            (false, false) => finite += lp1 - lp0,
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => Err(DetectError::UndefinedLikelihood),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (false, false) => Ok(finite),
    }
}

fn check_rate(lambda: f64) -> Result<(), DetectError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(DetectError::InvalidRate(lambda))
    }
}

/// Optimum passive detector under traffic model A: log-likelihood ratio of
/// "out is in plus jitter" against "out is an independent Poisson flow",
/// Σ log f_jitter(out_i − in_i) − log f_Exp(λ)(out_i).
///
/// Zero-scale jitter degenerates H1 to a point mass: exact equality scores +∞,
/// anything else is an error.
pub fn detect_passive_lrt_a(
    in_ipds: &IpdVector,
    out_ipds: &IpdVector,
    lambda: f64,
    jitter: &JitterModel,
) -> Result<DetectionScore, DetectError> {
    check_rate(lambda)?;
    let (a, b) = aligned(in_ipds.as_slice(), out_ipds.as_slice())
        .map_err(|_| DetectError::TooShort { need: 1, got: 0 })?;
    let name = "PassiveLrtA";
    let Some(jitter_density) = jitter.density() else {
        return if a == b {
            Ok(DetectionScore { value: f64::INFINITY, detector_name: name, n_used: a.len() })
        } else {
            Err(DetectError::DegenerateJitter)
        };
    };
    let h0 = Density::Exponential { rate: lambda };
    let value = sum_llr(
        a.iter()
            .zip(b)
            .map(|(&i, &o)| (jitter_density.log_pdf(o - i), h0.log_pdf(o))),
    )?;
    Ok(DetectionScore { value, detector_name: name, n_used: a.len() })
}

fn effective_watermark<'r>(
    record: &'r WatermarkRecord,
    observed: &IpdVector,
) -> Result<(Vec<f64>, &'r [f64]), DetectError> {
    let chips = record.watermark.as_ref().ok_or(DetectError::MissingWatermark)?;
    let (rec, obs) = aligned(record.recorded_ipds.as_slice(), observed.as_slice())
        .map_err(|_| DetectError::TooShort { need: 1, got: 0 })?;
    let eff = rec.len().min(chips.len());
    if eff == 0 {
        return Err(DetectError::TooShort { need: 1, got: 0 });
    }
    let d: Vec<f64> = rec[..eff]
        .iter()
        .zip(&obs[..eff])
        .map(|(&r, &o)| o - r)
        .collect();
    Ok((d, &chips.values()[..eff]))
}

/// Subtract-and-linearly-correlate: Pearson correlation of the difference
/// signal `observed − recorded` against the chip sequence, over the effective
/// watermark length. The optimum detector for correlated traffic and a strong
/// all-rounder elsewhere.
pub fn detect_slcorr(
    record: &WatermarkRecord,
    observed: &IpdVector,
) -> Result<DetectionScore, DetectError> {
    let (d, w) = effective_watermark(record, observed)?;
    let value = correlation_slices(&d, w).map_err(|e| match e {
        DetectError::ZeroVariance("first input") => DetectError::ZeroVariance("difference signal"),
        DetectError::ZeroVariance("second input") => DetectError::ZeroVariance("watermark"),
        other => other,
    })?;
    Ok(DetectionScore { value, detector_name: "SLCorr", n_used: d.len() })
}

/// Optimum non-blind detector under traffic model A: LLR of "observed is the
/// watermarked egress plus jitter" against "observed is an independent Poisson
/// flow", using the Laplace(0, 1/λ) difference density under H0:
/// Σ log f_jitter(d_i − w_i) − log f_Laplace(0,1/λ)(d_i), d = observed − recorded.
pub fn detect_nonblind_lrt_a(
    record: &WatermarkRecord,
    observed: &IpdVector,
    lambda: f64,
    jitter: &JitterModel,
) -> Result<DetectionScore, DetectError> {
    check_rate(lambda)?;
    let (d, w) = effective_watermark(record, observed)?;
    let name = "NonblindLrtA";
    let Some(jitter_density) = jitter.density() else {
        return if d.iter().zip(w).all(|(&di, &wi)| di == wi) {
            Ok(DetectionScore { value: f64::INFINITY, detector_name: name, n_used: d.len() })
        } else {
            Err(DetectError::DegenerateJitter)
        };
    };
    let h0 = h0_difference_density(lambda).map_err(|_| DetectError::InvalidRate(lambda))?;
    let value = sum_llr(
        d.iter()
            .zip(w)
            .map(|(&di, &wi)| (jitter_density.log_pdf(di - wi), h0.log_pdf(di))),
    )?;
    Ok(DetectionScore { value, detector_name: name, n_used: d.len() })
}

/// Neyman–Pearson thresholding with a ≥ tie rule.
pub fn decide(score: DetectionScore, threshold: f64) -> Decision {
    Decision { linked: score.value >= threshold, score, threshold }
}

/// A detector plus the distribution parameters the LRT variants need, so
/// experiment configs and the linking matrix can name detectors uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detector {
    PassiveCorr,
    PassiveLrtA { lambda: f64, jitter_dist: JitterDist, jitter_scale: f64 },
    SLCorr,
    NonblindLrtA { lambda: f64, jitter_dist: JitterDist, jitter_scale: f64 },
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::PassiveCorr => "PassiveCorr",
            Detector::PassiveLrtA { .. } => "PassiveLrtA",
            Detector::SLCorr => "SLCorr",
            Detector::NonblindLrtA { .. } => "NonblindLrtA",
        }
    }

    /// Passive detectors compare recorded IPDs to the observation; non-blind
    /// detectors additionally use the record's watermark.
    pub fn is_passive(&self) -> bool {
        matches!(self, Detector::PassiveCorr | Detector::PassiveLrtA { .. })
    }

    /// Builds a detector from its CLI name; LRT variants take their model
    /// parameters from the supplied values.
    pub fn from_name(
        name: &str,
        lambda: f64,
        jitter_dist: JitterDist,
        jitter_scale: f64,
    ) -> Option<Detector> {
        match name {
            "PassiveCorr" => Some(Detector::PassiveCorr),
            "PassiveLrtA" => Some(Detector::PassiveLrtA { lambda, jitter_dist, jitter_scale }),
            "SLCorr" => Some(Detector::SLCorr),
            "NonblindLrtA" => Some(Detector::NonblindLrtA { lambda, jitter_dist, jitter_scale }),
            _ => None,
        }
    }

    /// Scores one record/observation pair.
    pub fn score(
        &self,
        record: &WatermarkRecord,
        observed: &IpdVector,
    ) -> Result<DetectionScore, DetectError> {
        match *self {
            Detector::PassiveCorr => detect_passive(&record.recorded_ipds, observed),
            Detector::PassiveLrtA { lambda, jitter_dist, jitter_scale } => {
                let model = JitterModel::new(jitter_dist, jitter_scale, 0)
                    .map_err(|_| DetectError::DegenerateJitter)?;
                detect_passive_lrt_a(&record.recorded_ipds, observed, lambda, &model)
            }
            Detector::SLCorr => detect_slcorr(record, observed),
            Detector::NonblindLrtA { lambda, jitter_dist, jitter_scale } => {
                let model = JitterModel::new(jitter_dist, jitter_scale, 0)
                    .map_err(|_| DetectError::DegenerateJitter)?;
                detect_nonblind_lrt_a(record, observed, lambda, &model)
            }
        }
    }
}
