//! Non-blind flow watermarking over inter-packet delays (IPDs).
//!
//! The pipeline: record the IPDs of an incoming flow, add a keyed ±a
//! spread-spectrum chip sequence by delaying packets (never advancing them),
//! let the flow cross a jittery channel, then decide whether an observed flow
//! is the watermarked egress by combining the recorded IPDs, the chip
//! sequence, and the observation. Passive detectors that skip the embedding
//! step are included as baselines, and [`analysis`] provides a deterministic
//! Monte Carlo harness (ROC/AUC, threshold calibration, bootstrap CIs) to
//! compare them.
//!
//! All randomness flows from explicit 64-bit seeds through [`seed::derive_seed`],
//! so every experiment is reproducible bit-for-bit, in parallel or not.

pub mod analysis;
pub mod channel;
pub mod detect;
pub mod flow;
pub mod linking;
mod sampling;
pub mod seed;
pub mod stats;
pub mod textio;
pub mod traffic;
pub mod watermark;

pub use channel::{h0_difference_density, apply_jitter, Density, JitterDist, JitterModel};
pub use detect::{
    decide, detect_nonblind_lrt_a, detect_passive, detect_passive_lrt_a, detect_slcorr,
    normalized_correlation, Decision, DetectError, DetectionScore, Detector,
};
pub use flow::{ipd, reconstruct, truncate_pair, Flow, FlowError, IpdVector};
pub use traffic::{gen_model_a, gen_model_b, DeviationDist, ModelAParams, ModelBParams};
pub use watermark::{
    embed, gen_watermark, max_delay_introduced, EmbedStats, WatermarkParams, WatermarkRecord,
    WatermarkSequence,
};
