use serde::{Deserialize, Serialize};

use super::{SignalError, Trace};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimShape {
    /// `+A` for the first half period, `-A` for the second.
    #[default]
    BipolarSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StimParams {
    /// Volts.
    pub amplitude: f64,
    /// Hz.
    pub frequency: f64,
    /// Seconds.
    pub duration: f64,
    pub shape: StimShape,
}

impl Default for StimParams {
    /// Locomotion protocol: 0.4 s of 42 Hz bipolar pulses at 3.0 V.
    fn default() -> Self {
        Self { amplitude: 3.0, frequency: 42.0, duration: 0.4, shape: StimShape::BipolarSquare }
    }
}

impl StimParams {
    /// Single bipolar pulse used during neural recordings.
    pub fn recording_pulse(amplitude: f64) -> Self {
        Self { amplitude, frequency: 1.0, duration: 1.0, shape: StimShape::BipolarSquare }
    }

    /// Complete cycles that fit in the duration; a trailing partial cycle
    /// is dropped.
    pub fn complete_cycles(&self) -> u64 {
        // Nudge so products like 0.29 * 100 = 28.999... still floor to 29.
        (self.duration * self.frequency + 1e-9).floor() as u64
    }
}

pub fn gen_stimulus(p: &StimParams, sample_rate: f64) -> Result<Trace, SignalError> {
    if !(p.amplitude >= 0.0) {
        return Err(SignalError::InvalidStimulus("amplitude must be >= 0"));
    }
    if !(p.frequency > 0.0) {
        return Err(SignalError::InvalidStimulus("frequency must be > 0"));
    }
    if !(p.duration > 0.0) {
        return Err(SignalError::InvalidStimulus("duration must be > 0"));
    }
    if !(sample_rate >= 20.0 * p.frequency) || !sample_rate.is_finite() {
        return Err(SignalError::UndersampledStimulus { sample_rate, frequency: p.frequency });
    }
    let len = (p.duration * sample_rate).round() as usize;
    let cycles = p.complete_cycles() as f64;
    let samples = (0..len)
        .map(|i| {
            // Phase in cycles since onset.
            let phase = i as f64 * p.frequency / sample_rate;
            if phase >= cycles {
                0.0
            } else if phase.fract() < 0.5 {
                p.amplitude
            } else {
                -p.amplitude
            }
        })
        .collect();
    Ok(Trace::new(sample_rate, samples))
}
