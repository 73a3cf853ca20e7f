//! Trace files.
//!
//! CSV layout:
//!
//! ```text
//! # sample_rate_hz=25000
//! voltage_v
//! 0.0000123
//! ...
//! ```
//!
//! Binary layout, all little endian: magic `CYTR`, `u32` version (1),
//! `f64` sample rate, `u64` sample count, then the `f64` samples.

use super::{SignalError, Trace};

const MAGIC: &[u8; 4] = b"CYTR";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

fn format_err(msg: impl Into<String>) -> SignalError {
    SignalError::Format(msg.into())
}

pub fn write_trace_csv(t: &Trace) -> String {
    let mut out = format!("# sample_rate_hz={}\nvoltage_v\n", t.sample_rate);
    for v in &t.samples {
        // Debug formatting is the shortest string that parses back exactly.
        out.push_str(&format!("{v:?}\n"));
    }
    out
}

pub fn read_trace_csv(text: &str) -> Result<Trace, SignalError> {
    let mut sample_rate = None;
    let mut header_seen = false;
    let mut samples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("sample_rate_hz=") {
                let rate: f64 = value
                    .trim()
                    .parse()
                    .map_err(|e| format_err(format!("line {}: bad sample rate: {e}", lineno + 1)))?;
                sample_rate = Some(rate);
            }
            continue;
        }
        if !header_seen {
            if line != "voltage_v" {
                return Err(format_err(format!("line {}: expected header `voltage_v`", lineno + 1)));
            }
            header_seen = true;
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|e| format_err(format!("line {}: bad sample {line:?}: {e}", lineno + 1)))?;
        if !v.is_finite() {
            return Err(format_err(format!("line {}: non-finite sample", lineno + 1)));
        }
        samples.push(v);
    }
    let sample_rate = sample_rate.ok_or_else(|| format_err("missing `# sample_rate_hz=` line"))?;
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(SignalError::InvalidSampleRate(sample_rate));
    }
    Ok(Trace::new(sample_rate, samples))
}

pub fn write_trace_binary(t: &Trace) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&t.sample_rate.to_le_bytes());
    out.extend_from_slice(&(t.len() as u64).to_le_bytes());
    for v in &t.samples {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_trace_binary(bytes: &[u8]) -> Result<Trace, SignalError> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(format_err("not a CYTR trace"));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8 bytes") };
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(format_err(format!("unsupported version {version}")));
    }
    let sample_rate = f64::from_le_bytes(word(8));
    let count = u64::from_le_bytes(word(16)) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != count.saturating_mul(8) {
        return Err(format_err(format!("expected {count} samples, found {} bytes", body.len())));
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(SignalError::InvalidSampleRate(sample_rate));
    }
    let samples = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Trace::new(sample_rate, samples))
}
