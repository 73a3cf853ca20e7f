use serde::{Deserialize, Serialize};

use super::{bandpass, SignalError, Trace};

/// Median absolute value to Gaussian standard deviation.
const MAD_TO_SIGMA: f64 = 0.6745;
const THRESHOLD_MULTIPLIER: f64 = 5.0;

/// Zero `[edge, edge + window)` after every stimulus edge (times in seconds).
pub fn blank_artifacts(t: &Trace, edge_times: &[f64], window: f64) -> Result<Trace, SignalError> {
    let end = t.duration();
    let width = (window * t.sample_rate).round() as usize;
    let mut out = t.clone();
    for &edge in edge_times {
        if !(edge >= 0.0) || edge > end + 0.5 / t.sample_rate {
            return Err(SignalError::EdgeOutOfRange { edge, end });
        }
        let start = t.index_of(edge).min(t.len());
        let stop = (start + width).min(t.len());
        out.samples[start..stop].fill(0.0);
    }
    Ok(out)
}

/// Robust detection level `5 * median(|x|) / 0.6745`.
pub fn threshold(t: &Trace) -> Result<f64, SignalError> {
    if t.is_empty() {
        return Err(SignalError::EmptyTrace);
    }
    let mut abs: Vec<f64> = t.samples.iter().map(|v| v.abs()).collect();
    let n = abs.len();
    let mid = n / 2;
    let (left, &mut upper, _) = abs.select_nth_unstable_by(mid, f64::total_cmp);
    let median = if n % 2 == 1 {
        upper
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    Ok(THRESHOLD_MULTIPLIER * median / MAD_TO_SIGMA)
}

/// Detected spikes as sample indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeTrain {
    pub indices: Vec<usize>,
    pub threshold_used: f64,
}

impl SpikeTrain {
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

/// Mark every upward crossing of `|x|` through `threshold_v`. Crossings
/// closer than `refractory` seconds to the previous detection are dropped.
/// A trace that starts above threshold counts as a crossing at sample 0.
pub fn detect_spikes(t: &Trace, threshold_v: f64, refractory: f64) -> Result<SpikeTrain, SignalError> {
    if !(threshold_v >= 0.0) {
        return Err(SignalError::NegativeThreshold(threshold_v));
    }
    let dead = (refractory.max(0.0) * t.sample_rate).round() as usize;
    let mut indices: Vec<usize> = Vec::new();
    let mut was_above = false;
    for (i, v) in t.samples.iter().enumerate() {
        let above = v.abs() > threshold_v;
        if above && !was_above {
            let clear = indices.last().is_none_or(|&last| i - last >= dead);
            if clear {
                indices.push(i);
            }
        }
        was_above = above;
    }
    Ok(SpikeTrain { indices, threshold_used: threshold_v })
}

/// Settings of the recording analysis chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    /// Stimulus edges to blank, seconds.
    pub edges: Vec<f64>,
    pub blank_window: f64,
    pub low: f64,
    pub high: f64,
    pub order: usize,
    pub refractory: f64,
}

impl Default for PipelineParams {
    /// Edges of the single 1 Hz, 1 s bipolar recording pulse.
    fn default() -> Self {
        Self {
            edges: vec![0.0, 0.5, 1.0],
            blank_window: 0.050,
            low: 300.0,
            high: 5000.0,
            order: 2,
            refractory: 0.001,
        }
    }
}

/// Blank, bandpass, threshold and detect.
pub fn run_pipeline(t: &Trace, p: &PipelineParams) -> Result<SpikeTrain, SignalError> {
    let blanked = blank_artifacts(t, &p.edges, p.blank_window)?;
    let filtered = bandpass(&blanked, p.low, p.high, p.order)?;
    let level = threshold(&filtered)?;
    detect_spikes(&filtered, level, p.refractory)
}
