//! Stimulation waveforms and the neural recording pipeline.
//!
//! Recordings are cleaned by zeroing a window after every stimulus edge,
//! bandpass filtered at 300-5000 Hz, and thresholded at
//! `5 * median(|x|) / 0.6745`, i.e. five robust noise standard deviations.

mod electrode;
mod filter;
mod format;
mod spikes;
mod stimulus;
mod synth;

pub use electrode::{electrode_resistance, ElectrodeModel};
pub use filter::{bandpass, Biquad, ButterworthBandpass};
pub use format::{read_trace_binary, read_trace_csv, write_trace_binary, write_trace_csv};
pub use spikes::{blank_artifacts, detect_spikes, run_pipeline, threshold, PipelineParams, SpikeTrain};
pub use stimulus::{gen_stimulus, StimParams, StimShape};
pub use synth::{expected_rate, synth_neural_response, NeuralResponseModel};

use thiserror::Error;

/// Default recording rate.
pub const DEFAULT_SAMPLE_RATE: f64 = 25_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("sample rate {sample_rate} Hz is below 20x the stimulus frequency {frequency} Hz")]
    UndersampledStimulus { sample_rate: f64, frequency: f64 },
    #[error("invalid stimulus parameters: {0}")]
    InvalidStimulus(&'static str),
    #[error("edge at {edge} s lies beyond the trace end at {end} s")]
    EdgeOutOfRange { edge: f64, end: f64 },
    #[error("band {low}-{high} Hz is invalid for sample rate {sample_rate} Hz")]
    InvalidBand { low: f64, high: f64, sample_rate: f64 },
    #[error("filter order must be at least 1")]
    ZeroOrder,
    #[error("trace is empty")]
    EmptyTrace,
    #[error("threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),
    #[error("stimulation voltage must be in [0, 5] V, got {0}")]
    VoltageOutOfRange(f64),
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("trace format error: {0}")]
    Format(String),
}

/// Uniformly sampled voltage signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
}

impl Trace {
    pub fn new(sample_rate: f64, samples: Vec<f64>) -> Self {
        Self { sample_rate, samples }
    }

    pub fn zeros(sample_rate: f64, len: usize) -> Self {
        Self { sample_rate, samples: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Sample index of time `t`, rounded to the nearest sample.
    pub fn index_of(&self, t: f64) -> usize {
        (t * self.sample_rate).round() as usize
    }
}
