//! Synthetic flow generators for the two extreme traffic models: independent
//! Poisson flows (model A) and shared-timing-pattern flows (model B), plus
//! trace ingestion via the flow text format.

use crate::flow::{Flow, FlowError};
use crate::sampling;
use crate::seed::rng_from;
use crate::textio::{self, LoadReport};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("rate lambda must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("model-A flows need at least 2 packets, got {0}")]
    TooFewPackets(usize),
    #[error("deviation sigma must be ≥ 0 and finite, got {0}")]
    InvalidSigma(f64),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Load(#[from] textio::TextError),
}

/// Poisson-process flow: i.i.d. Exponential(λ) IPDs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelAParams {
    pub rate_lambda: f64,
    pub n_packets: usize,
    pub seed: u64,
}

/// Shared base timing pattern plus small i.i.d. per-IPD deviation.
/// `deviation_sigma` is the scale parameter of the chosen family (Laplace
/// diversity or Gaussian standard deviation); 0 reproduces the base exactly,
/// the "completely correlated flows" extreme.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBParams {
    pub base: Flow,
    pub deviation_sigma: f64,
    pub deviation_dist: DeviationDist,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationDist {
    Laplace,
    Gaussian,
}

/// Draws a model-A flow starting at t = 0. Pure function of the params.
pub fn gen_model_a(params: &ModelAParams) -> Result<Flow, TrafficError> {
    if !(params.rate_lambda > 0.0 && params.rate_lambda.is_finite()) {
        return Err(TrafficError::InvalidRate(params.rate_lambda));
    }
    if params.n_packets < 2 {
        return Err(TrafficError::TooFewPackets(params.n_packets));
    }
    let mut rng = rng_from(params.seed);
    let mut packets = Vec::with_capacity(params.n_packets);
    let mut t = 0.0;
    packets.push(t);
    for _ in 1..params.n_packets {
        t += sampling::exponential(&mut rng, params.rate_lambda);
        packets.push(t);
    }
    Ok(Flow::new(format!("a-{:016x}", params.seed), packets)?)
}

/// Draws a model-B flow: base IPDs perturbed by i.i.d. deviations, clipped at
/// zero (IPDs of a physical flow cannot be negative). Packet count and start
/// time follow the base.
pub fn gen_model_b(params: &ModelBParams) -> Result<Flow, TrafficError> {
    if !(params.deviation_sigma >= 0.0 && params.deviation_sigma.is_finite()) {
        return Err(TrafficError::InvalidSigma(params.deviation_sigma));
    }
    let base_ipds = params.base.ipds();
    let mut rng = rng_from(params.seed);
    let sigma = params.deviation_sigma;
    let mut packets = Vec::with_capacity(params.base.len());
    let mut t = params.base.packets()[0];
    packets.push(t);
    for &d in base_ipds.iter() {
        let delta = if sigma == 0.0 {
            0.0
        } else {
            match params.deviation_dist {
                DeviationDist::Laplace => sampling::laplace(&mut rng, sigma),
                DeviationDist::Gaussian => sampling::gaussian(&mut rng, sigma),
            }
        };
        t += (d + delta).max(0.0);
        packets.push(t);
    }
    Ok(Flow::new(format!("b-{:016x}", params.seed), packets)?)
}

/// Reads flows from a file in the flow text format. Flows with fewer than two
/// packets are skipped and reported in the [`LoadReport`]; structural problems
/// (bad lines, decreasing timestamps) are errors naming the offending line.
pub fn load_flows(path: impl AsRef<Path>) -> Result<(Vec<Flow>, LoadReport), TrafficError> {
    Ok(textio::read_flows_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::normalized_correlation;
    use crate::flow::IpdVector;
    use crate::stats::{ks_critical_001, ks_statistic, mean, sample_std};

    fn model_a(lambda: f64, n: usize, seed: u64) -> Flow {
        gen_model_a(&ModelAParams { rate_lambda: lambda, n_packets: n, seed }).unwrap()
    }

    #[test]
    fn model_a_mean_and_variance() {
        let ipds = model_a(10.0, 10_001, 7).ipds();
        let m = mean(ipds.as_slice());
        // standard error of the mean = (1/lambda)/sqrt(10^4)
        assert!((m - 0.1).abs() <= 3.0 * 0.1 / 100.0, "mean {m}");
        let s = sample_std(ipds.as_slice());
        assert!((s * s - 0.01).abs() <= 1e-3, "variance {}", s * s);
    }

    #[test]
    fn model_a_deterministic() {
        assert_eq!(model_a(10.0, 100, 42), model_a(10.0, 100, 42));
        assert_ne!(
            model_a(10.0, 100, 42).packets(),
            model_a(10.0, 100, 43).packets()
        );
    }

    #[test]
    fn model_a_ks_against_exponential() {
        let lambda = 10.0;
        let ipds = model_a(lambda, 10_001, 2024).ipds();
        let d = ks_statistic(ipds.as_slice(), |x| 1.0 - (-lambda * x).exp());
        assert!(
            d < ks_critical_001(ipds.len()),
            "KS statistic {d} exceeds critical {}",
            ks_critical_001(ipds.len())
        );
    }

    #[test]
    fn model_a_rejects_bad_params() {
        assert!(gen_model_a(&ModelAParams { rate_lambda: 0.0, n_packets: 10, seed: 0 }).is_err());
        assert!(gen_model_a(&ModelAParams { rate_lambda: 1.0, n_packets: 1, seed: 0 }).is_err());
    }

    #[test]
    fn model_b_sigma_zero_is_identity() {
        let base = model_a(1.0, 50, 3);
        let out = gen_model_b(&ModelBParams {
            base: base.clone(),
            deviation_sigma: 0.0,
            deviation_dist: DeviationDist::Laplace,
            seed: 99,
        })
        .unwrap();
        assert_eq!(out.ipds(), base.ipds());
        assert_eq!(out.len(), base.len());
    }

    #[test]
    fn model_b_small_deviation_tracks_base() {
        // Varied base with mean IPD 1.0; a constant base would make the
        // correlation undefined (zero variance).
        let base = model_a(1.0, 1001, 11);
        let out = gen_model_b(&ModelBParams {
            base: base.clone(),
            deviation_sigma: 0.001,
            deviation_dist: DeviationDist::Laplace,
            seed: 12,
        })
        .unwrap();
        let r = normalized_correlation(&base.ipds(), &out.ipds()).unwrap();
        assert!(r >= 0.99, "correlation {r}");
    }

    #[test]
    fn model_b_two_draws_correlate() {
        let base = model_a(1.0, 1001, 21);
        let mk = |seed| {
            gen_model_b(&ModelBParams {
                base: base.clone(),
                deviation_sigma: 0.001,
                deviation_dist: DeviationDist::Gaussian,
                seed,
            })
            .unwrap()
        };
        let (x, y) = (mk(100), mk(200));
        assert_ne!(x.ipds(), y.ipds());
        let r = normalized_correlation(&x.ipds(), &y.ipds()).unwrap();
        assert!(r >= 0.9, "correlation {r}");
    }

    #[test]
    fn model_b_clips_negative_ipds() {
        let base = crate::flow::reconstruct(
            "tight",
            0.0,
            &IpdVector::from(vec![0.001; 400]),
        )
        .unwrap();
        let out = gen_model_b(&ModelBParams {
            base,
            deviation_sigma: 0.05,
            deviation_dist: DeviationDist::Laplace,
            seed: 5,
        })
        .unwrap();
        assert!(out.ipds().iter().all(|&d| d >= 0.0));
        assert!(out.ipds().iter().any(|&d| d == 0.0), "expected clipping");
    }

    #[test]
    fn model_b_rejects_bad_sigma() {
        let base = model_a(1.0, 10, 0);
        assert!(gen_model_b(&ModelBParams {
            base,
            deviation_sigma: -1.0,
            deviation_dist: DeviationDist::Laplace,
            seed: 0,
        })
        .is_err());
    }
}
