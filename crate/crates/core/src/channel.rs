//! The network between embedding point and observation point: zero-mean IPD
//! jitter, plus the evaluable densities the likelihood-ratio detectors need.

use crate::flow::IpdVector;
use crate::sampling;
use crate::seed::rng_from;
use crate::stats::normal_cdf;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("jitter scale must be ≥ 0 and finite, got {0}")]
    InvalidScale(f64),
    #[error("rate lambda must be positive and finite, got {0}")]
    InvalidRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JitterDist {
    Laplace,
    Gaussian,
    Uniform,
}

impl JitterDist {
    pub fn name(&self) -> &'static str {
        match self {
            JitterDist::Laplace => "laplace",
            JitterDist::Gaussian => "gaussian",
            JitterDist::Uniform => "uniform",
        }
    }
}

/// Zero-mean jitter on IPDs. `scale` is the family's scale parameter: Laplace
/// diversity b, Gaussian σ, or uniform half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterModel {
    dist: JitterDist,
    scale: f64,
    seed: u64,
}

impl JitterModel {
    pub fn new(dist: JitterDist, scale: f64, seed: u64) -> Result<Self, ChannelError> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(ChannelError::InvalidScale(scale));
        }
        Ok(JitterModel { dist, scale, seed })
    }

    pub fn dist(&self) -> JitterDist {
        self.dist
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The raw jitter draws, before any clipping interaction with the IPDs.
    /// This is the stream distribution tests (KS) should check.
    pub fn sample_raw(&self, n: usize) -> Vec<f64> {
        let mut rng = rng_from(self.seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    fn draw(&self, rng: &mut impl rand::Rng) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        match self.dist {
            JitterDist::Laplace => sampling::laplace(rng, self.scale),
            JitterDist::Gaussian => sampling::gaussian(rng, self.scale),
            JitterDist::Uniform => sampling::uniform_pm(rng, self.scale),
        }
    }

    /// The jitter density, or `None` for the degenerate zero-scale point mass.
    pub fn density(&self) -> Option<Density> {
        if self.scale == 0.0 {
            return None;
        }
        Some(match self.dist {
            JitterDist::Laplace => Density::Laplace { location: 0.0, scale: self.scale },
            JitterDist::Gaussian => Density::Gaussian { mean: 0.0, sigma: self.scale },
            JitterDist::Uniform => Density::Uniform { center: 0.0, half_width: self.scale },
        })
    }
}

/// `output_i = max(0, ipds_i + j_i)` with i.i.d. zero-mean jitter; the zero
/// scale model is exactly the identity.
pub fn apply_jitter(ipds: &IpdVector, model: &JitterModel) -> IpdVector {
    if model.scale == 0.0 {
        return ipds.clone();
    }
    let mut rng = rng_from(model.seed);
    IpdVector::new(
        ipds.iter()
            .map(|&d| (d + model.draw(&mut rng)).max(0.0))
            .collect(),
    )
}

/// Pointwise-evaluable densities used by the likelihood-ratio detectors.
/// Log-densities are computed directly in log space, so tails stay finite out
/// to hundreds of scale units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Laplace { location: f64, scale: f64 },
    Gaussian { mean: f64, sigma: f64 },
    Uniform { center: f64, half_width: f64 },
    Exponential { rate: f64 },
}

impl Density {
    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Density::Laplace { location, scale } => {
                -(2.0 * scale).ln() - (x - location).abs() / scale
            }
            Density::Gaussian { mean, sigma } => {
                let z = (x - mean) / sigma;
                -0.5 * (2.0 * std::f64::consts::PI * sigma * sigma).ln() - 0.5 * z * z
            }
            Density::Uniform { center, half_width } => {
                if (x - center).abs() <= half_width {
                    -(2.0 * half_width).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Density::Exponential { rate } => {
                if x >= 0.0 {
                    rate.ln() - rate * x
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Density::Laplace { location, scale } => {
                let z = (x - location) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Density::Gaussian { mean, sigma } => normal_cdf((x - mean) / sigma),
            Density::Uniform { center, half_width } => {
                ((x - center + half_width) / (2.0 * half_width)).clamp(0.0, 1.0)
            }
            Density::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }
}

/// Density of D = X − Y for X, Y i.i.d. Exponential(λ): Laplace(0, 1/λ),
/// f(d) = (λ/2)·exp(−λ|d|). This is the H0 difference-signal density under
/// traffic model A.
pub fn h0_difference_density(rate_lambda: f64) -> Result<Density, ChannelError> {
    if !(rate_lambda > 0.0 && rate_lambda.is_finite()) {
        return Err(ChannelError::InvalidRate(rate_lambda));
    }
    Ok(Density::Laplace { location: 0.0, scale: 1.0 / rate_lambda })
}
