//! Spread-spectrum watermark generation and the causality-respecting embedder:
//! record the incoming IPDs, then delay packets so outgoing IPDs carry a keyed
//! ±a chip sequence. The recorded IPDs plus the chips form the non-blind state
//! a detector needs later.

use crate::flow::{ipd, Flow, FlowError, IpdVector};
use crate::seed::rng_from;
use rand::Rng;
use thiserror::Error;

/// Above this amplitude the watermark stops hiding inside natural jitter;
/// front ends should warn (the library does not reject).
pub const AMPLITUDE_WARN_THRESHOLD: f64 = 0.010;

#[derive(Debug, Error, PartialEq)]
pub enum WatermarkError {
    #[error("watermark amplitude must be positive and finite, got {0}")]
    InvalidAmplitude(f64),
    #[error("watermark length must be ≥ 1")]
    EmptySequence,
    #[error("base offset must be ≥ 0 and finite, got {0}")]
    InvalidBaseOffset(f64),
    #[error("packet count mismatch: incoming {incoming}, outgoing {outgoing}")]
    CountMismatch { incoming: usize, outgoing: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkParams {
    /// Seed of the chip sequence; the shared secret between embedder and detector.
    pub key: u64,
    /// Requested sequence length (truncated to the flow's IPD count at embed time).
    pub n: usize,
    /// Chip magnitude in seconds ("a few milliseconds").
    pub amplitude_a: f64,
}

impl WatermarkParams {
    fn validate(&self) -> Result<(), WatermarkError> {
        if !(self.amplitude_a > 0.0 && self.amplitude_a.is_finite()) {
            return Err(WatermarkError::InvalidAmplitude(self.amplitude_a));
        }
        if self.n == 0 {
            return Err(WatermarkError::EmptySequence);
        }
        Ok(())
    }
}

/// Keyed antipodal chip sequence: every element is exactly +a or −a.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkSequence {
    amplitude_a: f64,
    values: Vec<f64>,
}

impl WatermarkSequence {
    pub(crate) fn from_values(amplitude_a: f64, values: Vec<f64>) -> Self {
        WatermarkSequence { amplitude_a, values }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude_a
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[must_use]
    pub(crate) fn truncated(&self, n: usize) -> Self {
        WatermarkSequence {
            amplitude_a: self.amplitude_a,
            values: self.values[..self.values.len().min(n)].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedStats {
    /// Delay added to the first packet to buy headroom for negative chips.
    pub base_offset: f64,
    /// Number of packets released at arrival because the target release time
    /// would have violated causality (realized IPD differs from target).
    pub clip_count: usize,
}

/// The non-blind detector state for one flow: pre-embedding IPDs, the chip
/// sequence that was added, and how the embedding went. A record without a
/// watermark carries recorded IPDs only (passive use).
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkRecord {
    pub flow_id: String,
    pub recorded_ipds: IpdVector,
    pub watermark: Option<WatermarkSequence>,
    pub embed_stats: EmbedStats,
}

impl WatermarkRecord {
    /// Record with no watermark, for passive detectors over recorded IPDs.
    pub fn passive(flow_id: impl Into<String>, recorded_ipds: IpdVector) -> Self {
        WatermarkRecord {
            flow_id: flow_id.into(),
            recorded_ipds,
            watermark: None,
            embed_stats: EmbedStats { base_offset: 0.0, clip_count: 0 },
        }
    }
}

/// Chip signs drawn i.i.d. uniform from the key; same key, same sequence.
pub fn gen_watermark(params: &WatermarkParams) -> Result<WatermarkSequence, WatermarkError> {
    params.validate()?;
    let mut rng = rng_from(params.key);
    let a = params.amplitude_a;
    let values = (0..params.n)
        .map(|_| if rng.random::<bool>() { a } else { -a })
        .collect();
    Ok(WatermarkSequence::from_values(a, values))
}

/// Embeds the watermark by delaying packets, never advancing them.
///
/// A virtual queue realizes the target IPDs causally: packet 0 leaves at
/// arrival + base_offset, and each later packet leaves at
/// `max(its arrival, previous release + target IPD)` where the target IPD is
/// the incoming IPD plus the chip (pass-through beyond the chip sequence).
/// Releases forced to arrival are counted in `clip_count`; a base_offset of at
/// least n·a (the worst-case drawdown of a ±a chip walk) guarantees zero clips.
pub fn embed(
    incoming: &Flow,
    params: &WatermarkParams,
    base_offset: f64,
) -> Result<(Flow, WatermarkRecord), WatermarkError> {
    params.validate()?;
    if !(base_offset >= 0.0 && base_offset.is_finite()) {
        return Err(WatermarkError::InvalidBaseOffset(base_offset));
    }
    let recorded = ipd(incoming);
    let full = gen_watermark(params)?;
    let chips = full.truncated(recorded.len());

    let arrivals = incoming.packets();
    let mut releases = Vec::with_capacity(arrivals.len());
    releases.push(arrivals[0] + base_offset);
    let mut clip_count = 0;
    for (i, &in_ipd) in recorded.iter().enumerate() {
        let chip = chips.values().get(i).copied().unwrap_or(0.0);
        let target = releases[i] + in_ipd + chip;
        let arrival = arrivals[i + 1];
        if target < arrival {
            clip_count += 1;
            releases.push(arrival);
        } else {
            releases.push(target);
        }
    }

    let outgoing = Flow::new(incoming.id(), releases)?;
    let record = WatermarkRecord {
        flow_id: incoming.id().to_string(),
        recorded_ipds: recorded,
        watermark: Some(chips),
        embed_stats: EmbedStats { base_offset, clip_count },
    };
    Ok((outgoing, record))
}

/// Largest per-packet delay between matched incoming and outgoing packets;
/// the quantity the invisibility budget constrains.
pub fn max_delay_introduced(incoming: &Flow, outgoing: &Flow) -> Result<f64, WatermarkError> {
    if incoming.len() != outgoing.len() {
        return Err(WatermarkError::CountMismatch {
            incoming: incoming.len(),
            outgoing: outgoing.len(),
        });
    }
    Ok(incoming
        .packets()
        .iter()
        .zip(outgoing.packets())
        .map(|(i, o)| o - i)
        .fold(f64::NEG_INFINITY, f64::max))
}
