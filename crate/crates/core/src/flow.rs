//! Packet-timing data types: flows (timestamp sequences) and IPD vectors.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("flow `{flow_id}` has {count} packet(s); at least 2 are required")]
    TooFewPackets { flow_id: String, count: usize },
    #[error("flow `{flow_id}` has decreasing timestamps at packet {index}")]
    DecreasingTimestamps { flow_id: String, index: usize },
    #[error("flow `{flow_id}` has a non-finite timestamp at packet {index}")]
    NonFiniteTimestamp { flow_id: String, index: usize },
    #[error("invalid flow id `{0}`: must be non-empty and contain no comma, newline, or leading `#`")]
    InvalidFlowId(String),
    #[error("negative IPD {value} at index {index}: flows cannot run backwards")]
    NegativeIpd { index: usize, value: f64 },
    #[error("empty IPD vector reconstructs a single-packet flow, which is rejected")]
    EmptyIpds,
}

pub(crate) fn validate_flow_id(id: &str) -> Result<(), FlowError> {
    if id.is_empty() || id.contains(',') || id.contains('\n') || id.starts_with('#') {
        return Err(FlowError::InvalidFlowId(id.to_string()));
    }
    Ok(())
}

/// One direction of one connection: packet arrival timestamps in seconds.
///
/// Construction enforces the invariants every consumer relies on: at least
/// two packets (so at least one IPD) and non-decreasing, finite timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    flow_id: String,
    packets: Vec<f64>,
}

impl Flow {
    pub fn new(flow_id: impl Into<String>, packets: Vec<f64>) -> Result<Self, FlowError> {
        let flow_id = flow_id.into();
        validate_flow_id(&flow_id)?;
        if packets.len() < 2 {
            return Err(FlowError::TooFewPackets { flow_id, count: packets.len() });
        }
        for (i, &t) in packets.iter().enumerate() {
            if !t.is_finite() {
                return Err(FlowError::NonFiniteTimestamp { flow_id, index: i });
            }
            if i > 0 && t < packets[i - 1] {
                return Err(FlowError::DecreasingTimestamps { flow_id, index: i });
            }
        }
        Ok(Flow { flow_id, packets })
    }

    pub fn id(&self) -> &str {
        &self.flow_id
    }

    pub fn packets(&self) -> &[f64] {
        &self.packets
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    #[must_use]
    pub fn with_id(mut self, flow_id: impl Into<String>) -> Self {
        self.flow_id = flow_id.into();
        self
    }

    /// Inter-packet delays: element i is `packets[i+1] - packets[i]`.
    pub fn ipds(&self) -> IpdVector {
        ipd(self)
    }
}

/// Inter-packet delays in seconds.
///
/// Derived from a [`Flow`] every element is ≥ 0; after watermark or channel
/// arithmetic (difference signals) elements may be any real.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IpdVector {
    values: Vec<f64>,
}

impl IpdVector {
    pub fn new(values: Vec<f64>) -> Self {
        IpdVector { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }
}

impl From<Vec<f64>> for IpdVector {
    fn from(values: Vec<f64>) -> Self {
        IpdVector::new(values)
    }
}

/// First differences of the flow's timestamps; length is `flow.len() - 1`.
pub fn ipd(flow: &Flow) -> IpdVector {
    IpdVector::new(flow.packets().windows(2).map(|w| w[1] - w[0]).collect())
}

/// Inverse of [`ipd`] up to the start timestamp: cumulative sums from `start`.
///
/// Rejects negative IPDs and empty vectors (a single-packet flow is invalid).
pub fn reconstruct(flow_id: impl Into<String>, start: f64, ipds: &IpdVector) -> Result<Flow, FlowError> {
    if ipds.is_empty() {
        return Err(FlowError::EmptyIpds);
    }
    for (i, &d) in ipds.iter().enumerate() {
        if d < 0.0 || d.is_nan() {
            return Err(FlowError::NegativeIpd { index: i, value: d });
        }
    }
    let mut packets = Vec::with_capacity(ipds.len() + 1);
    let mut t = start;
    packets.push(t);
    for &d in ipds.iter() {
        t += d;
        packets.push(t);
    }
    Flow::new(flow_id, packets)
}

/// Prefix-truncates both vectors to the shorter length so detectors can
/// compare them elementwise. Errors when either is empty.
pub fn truncate_pair(a: &IpdVector, b: &IpdVector) -> Result<(IpdVector, IpdVector), FlowError> {
    let (sa, sb) = aligned(a.as_slice(), b.as_slice())?;
    Ok((IpdVector::new(sa.to_vec()), IpdVector::new(sb.to_vec())))
}

/// Borrowing form of [`truncate_pair`] for internal use (no allocation).
pub(crate) fn aligned<'a>(a: &'a [f64], b: &'a [f64]) -> Result<(&'a [f64], &'a [f64]), FlowError> {
    if a.is_empty() || b.is_empty() {
        return Err(FlowError::EmptyIpds);
    }
    let n = a.len().min(b.len());
    Ok((&a[..n], &b[..n]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ipd_direct_differencing() {
        let f = Flow::new("f", vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(ipd(&f).as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn ipd_simultaneous_packets_allowed() {
        let f = Flow::new("f", vec![5.0, 5.0]).unwrap();
        assert_eq!(ipd(&f).as_slice(), &[0.0]);
    }

    #[test]
    fn ipd_millisecond_scale() {
        let f = Flow::new("f", vec![0.0, 0.010, 0.025, 0.025]).unwrap();
        assert_eq!(ipd(&f).as_slice(), &[0.010, 0.015, 0.0]);
    }

    #[test]
    fn ipd_length_is_packets_minus_one() {
        let f = Flow::new("f", (0..57).map(|i| i as f64).collect()).unwrap();
        assert_eq!(ipd(&f).len(), 56);
    }

    #[test]
    fn reconstruct_inverts_ipd() {
        let f = reconstruct("f", 0.0, &IpdVector::from(vec![1.0, 2.0])).unwrap();
        assert_eq!(f.packets(), &[0.0, 1.0, 3.0]);
    }

    #[test]
    fn reconstruct_rejects_empty() {
        assert_eq!(
            reconstruct("f", 10.0, &IpdVector::default()).unwrap_err(),
            FlowError::EmptyIpds
        );
    }

    #[test]
    fn reconstruct_zero_ipds() {
        let f = reconstruct("f", 0.0, &IpdVector::from(vec![0.0, 0.0])).unwrap();
        assert_eq!(f.packets(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn reconstruct_rejects_negative_ipd() {
        let err = reconstruct("f", 0.0, &IpdVector::from(vec![1.0, -0.5])).unwrap_err();
        assert_eq!(err, FlowError::NegativeIpd { index: 1, value: -0.5 });
    }

    #[test]
    fn round_trip_exact() {
        let packets = vec![0.125, 0.25, 0.3125, 1.0625, 7.25];
        let f = Flow::new("f", packets.clone()).unwrap();
        let g = reconstruct("f", packets[0], &ipd(&f)).unwrap();
        assert_eq!(g.packets(), f.packets());
    }

    #[test]
    fn truncate_pair_prefixes() {
        let a = IpdVector::from(vec![1.0, 2.0, 3.0]);
        let b = IpdVector::from(vec![4.0, 5.0]);
        let (ta, tb) = truncate_pair(&a, &b).unwrap();
        assert_eq!(ta.as_slice(), &[1.0, 2.0]);
        assert_eq!(tb.as_slice(), &[4.0, 5.0]);
    }

    #[test]
    fn truncate_pair_identity_when_equal() {
        let a = IpdVector::from(vec![1.0]);
        let (ta, tb) = truncate_pair(&a, &a).unwrap();
        assert_eq!(ta.as_slice(), &[1.0]);
        assert_eq!(tb.as_slice(), &[1.0]);
    }

    #[test]
    fn truncate_pair_rejects_empty() {
        let a = IpdVector::default();
        let b = IpdVector::from(vec![1.0]);
        assert!(truncate_pair(&a, &b).is_err());
    }

    #[test]
    fn flow_rejects_short_and_decreasing() {
        assert!(matches!(
            Flow::new("f", vec![1.0]),
            Err(FlowError::TooFewPackets { .. })
        ));
        assert!(matches!(
            Flow::new("f", vec![1.0, 0.5]),
            Err(FlowError::DecreasingTimestamps { index: 1, .. })
        ));
        assert!(matches!(
            Flow::new("f", vec![0.0, f64::NAN]),
            Err(FlowError::NonFiniteTimestamp { index: 1, .. })
        ));
    }

    #[test]
    fn flow_id_validation() {
        assert!(Flow::new("", vec![0.0, 1.0]).is_err());
        assert!(Flow::new("a,b", vec![0.0, 1.0]).is_err());
        assert!(Flow::new("#x", vec![0.0, 1.0]).is_err());
        assert!(Flow::new("ok-id_9", vec![0.0, 1.0]).is_ok());
    }
}
