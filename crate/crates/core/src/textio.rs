//! Text formats:
//!
//! Flow files — one packet per line, `flow_id,timestamp_seconds`, `#` comments
//! ignored, timestamps per flow non-decreasing, multiple flows per file
//! (interleaving allowed).
//!
//! Record files — one block per watermark record: a `flow_id` header line,
//! then `recorded_ipd,chip` rows (the chip column is empty past the effective
//! watermark length), then a `stats,<base_offset>,<clip_count>` trailer.
//! Blocks are separated by blank lines.
//!
//! All numbers are written with Rust's shortest-round-trip `Display`, so a
//! write/read cycle reproduces every value bit for bit.

use crate::flow::{validate_flow_id, Flow, FlowError, IpdVector};
use crate::watermark::{EmbedStats, WatermarkRecord, WatermarkSequence};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: timestamp decreases within flow `{flow_id}`")]
    DecreasingTimestamp { line: usize, flow_id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

fn malformed(line: usize, msg: impl Into<String>) -> TextError {
    TextError::Malformed { line, msg: msg.into() }
}

/// Flows too short to carry IPDs are skipped on load, not fatal; the report
/// lets front ends surface them as warnings.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct LoadReport {
    pub skipped: Vec<(String, String)>,
}

pub fn parse_flows(text: &str) -> Result<(Vec<Flow>, LoadReport), TextError> {
    let mut order: Vec<String> = Vec::new();
    let mut packets: std::collections::HashMap<String, Vec<f64>> = std::collections::HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, ts_text) = line
            .split_once(',')
            .ok_or_else(|| malformed(line_no, "expected `flow_id,timestamp`"))?;
        let id = id.trim();
        validate_flow_id(id).map_err(|e| malformed(line_no, e.to_string()))?;
        let ts: f64 = ts_text
            .trim()
            .parse()
            .map_err(|_| malformed(line_no, format!("bad timestamp `{}`", ts_text.trim())))?;
        if !ts.is_finite() {
            return Err(malformed(line_no, "timestamp must be finite"));
        }
        let entry = packets.entry(id.to_string()).or_insert_with(|| {
            order.push(id.to_string());
            Vec::new()
        });
        if let Some(&last) = entry.last() {
            if ts < last {
                return Err(TextError::DecreasingTimestamp { line: line_no, flow_id: id.to_string() });
            }
        }
        entry.push(ts);
    }

    let mut flows = Vec::new();
    let mut report = LoadReport::default();
    for id in order {
        let pkts = packets.remove(&id).expect("id recorded in order list");
        if pkts.len() < 2 {
            report
                .skipped
                .push((id, format!("only {} packet(s); flows need at least 2", pkts.len())));
        } else {
            flows.push(Flow::new(id, pkts)?);
        }
    }
    Ok((flows, report))
}

pub fn render_flows(flows: &[Flow]) -> String {
    let mut out = String::new();
    for flow in flows {
        for &t in flow.packets() {
            writeln!(out, "{},{}", flow.id(), t).expect("write to String");
        }
    }
    out
}

pub fn read_flows_file(path: impl AsRef<Path>) -> Result<(Vec<Flow>, LoadReport), TextError> {
    parse_flows(&std::fs::read_to_string(path)?)
}

pub fn write_flows_file(path: impl AsRef<Path>, flows: &[Flow]) -> Result<(), TextError> {
    Ok(std::fs::write(path, render_flows(flows))?)
}

pub fn render_records(records: &[WatermarkRecord]) -> String {
    let mut out = String::new();
    for (i, rec) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "{}", rec.flow_id).expect("write to String");
        let chips = rec.watermark.as_ref().map(|w| w.values()).unwrap_or(&[]);
        for (j, &ipd) in rec.recorded_ipds.iter().enumerate() {
            match chips.get(j) {
                Some(c) => writeln!(out, "{ipd},{c}"),
                None => writeln!(out, "{ipd},"),
            }
            .expect("write to String");
        }
        writeln!(
            out,
            "stats,{},{}",
            rec.embed_stats.base_offset, rec.embed_stats.clip_count
        )
        .expect("write to String");
    }
    out
}

pub fn parse_records(text: &str) -> Result<Vec<WatermarkRecord>, TextError> {
    struct Block {
        flow_id: String,
        header_line: usize,
        ipds: Vec<f64>,
        chips: Vec<f64>,
        chips_closed: bool,
    }

    let mut records: Vec<WatermarkRecord> = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();
    let mut block: Option<Block> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if block.is_none() {
            if line.contains(',') {
                return Err(malformed(line_no, "expected a flow_id header line"));
            }
            validate_flow_id(line).map_err(|e| malformed(line_no, e.to_string()))?;
            if !seen_ids.insert(line.to_string()) {
                return Err(malformed(line_no, format!("duplicate flow id `{line}`")));
            }
            block = Some(Block {
                flow_id: line.to_string(),
                header_line: line_no,
                ipds: Vec::new(),
                chips: Vec::new(),
                chips_closed: false,
            });
            continue;
        }

        let mut parts = line.splitn(3, ',');
        let first = parts.next().unwrap_or("").trim();
        if first == "stats" {
            let offset_text = parts
                .next()
                .ok_or_else(|| malformed(line_no, "stats trailer needs `stats,base_offset,clip_count`"))?;
            let clip_text = parts
                .next()
                .ok_or_else(|| malformed(line_no, "stats trailer needs `stats,base_offset,clip_count`"))?;
            let base_offset: f64 = offset_text
                .trim()
                .parse()
                .map_err(|_| malformed(line_no, "bad base_offset"))?;
            if !(base_offset >= 0.0 && base_offset.is_finite()) {
                return Err(malformed(line_no, "base_offset must be ≥ 0 and finite"));
            }
            let clip_count: usize = clip_text
                .trim()
                .parse()
                .map_err(|_| malformed(line_no, "bad clip_count"))?;
            let b = block.take().expect("inside block");
            if b.ipds.is_empty() {
                return Err(malformed(b.header_line, "record has no IPD rows"));
            }
            let watermark = if b.chips.is_empty() {
                None
            } else {
                let amp = b.chips[0].abs();
                if b.chips.iter().any(|c| c.abs() != amp) || amp == 0.0 {
                    return Err(malformed(
                        b.header_line,
                        "watermark chips must all be ±a for a single positive amplitude",
                    ));
                }
                Some(WatermarkSequence::from_values(amp, b.chips))
            };
            records.push(WatermarkRecord {
                flow_id: b.flow_id,
                recorded_ipds: IpdVector::new(b.ipds),
                watermark,
                embed_stats: EmbedStats { base_offset, clip_count },
            });
        } else {
            let b = block.as_mut().expect("inside block");
            let chip_text = parts
                .next()
                .ok_or_else(|| malformed(line_no, "expected `recorded_ipd,chip`"))?;
            if parts.next().is_some() {
                return Err(malformed(line_no, "too many fields"));
            }
            let ipd: f64 = first
                .parse()
                .map_err(|_| malformed(line_no, format!("bad recorded_ipd `{first}`")))?;
            if !(ipd >= 0.0 && ipd.is_finite()) {
                return Err(malformed(line_no, "recorded_ipd must be ≥ 0 and finite"));
            }
            b.ipds.push(ipd);
            let chip_text = chip_text.trim();
            if chip_text.is_empty() {
                b.chips_closed = true;
            } else {
                if b.chips_closed {
                    return Err(malformed(
                        line_no,
                        "chip column must be a prefix: found a chip after an empty chip cell",
                    ));
                }
                let chip: f64 = chip_text
                    .parse()
                    .map_err(|_| malformed(line_no, format!("bad chip `{chip_text}`")))?;
                if !chip.is_finite() {
                    return Err(malformed(line_no, "chip must be finite"));
                }
                b.chips.push(chip);
            }
        }
    }
    if let Some(b) = block {
        return Err(malformed(b.header_line, format!("unterminated record `{}` (missing stats trailer)", b.flow_id)));
    }
    Ok(records)
}

pub fn read_records_file(path: impl AsRef<Path>) -> Result<Vec<WatermarkRecord>, TextError> {
    parse_records(&std::fs::read_to_string(path)?)
}

pub fn write_records_file(
    path: impl AsRef<Path>,
    records: &[WatermarkRecord],
) -> Result<(), TextError> {
    Ok(std::fs::write(path, render_records(records))?)
}
