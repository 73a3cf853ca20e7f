//! Synthetic nerve-cord recordings with a voltage-dependent firing rate.
//!
//! Spike events are drawn by thinning one Poisson process at `r_max`: each
//! candidate event survives with probability `r(v) / r_max`. Noise and
//! candidate events come from separate streams of the same seed, so for a
//! fixed seed the kept events at a lower rate are a subset of those at a
//! higher rate and voltage sweeps compare like with like.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::{SignalError, Trace};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuralResponseModel {
    /// Rate at the ramp onset, spikes/s.
    pub r_min: f64,
    /// Plateau rate, spikes/s.
    pub r_max: f64,
    pub ramp_start_v: f64,
    pub plateau_start_v: f64,
    pub plateau_end_v: f64,
    /// Voltage at which the rate has dropped by `drop_fraction`.
    pub drop_v: f64,
    pub drop_fraction: f64,
    /// Recording length, seconds. Covers the 1 s pulse plus its last edge.
    pub duration: f64,
    /// Background noise SD, volts.
    pub noise_sd: f64,
    /// Peak of a single-cycle sine spikelet, volts.
    pub spike_amplitude: f64,
    /// Spikelet width, seconds.
    pub spike_width: f64,
    /// Stimulus edge artifact per stimulus volt.
    pub artifact_gain: f64,
    /// Artifact decay time constant, seconds.
    pub artifact_tau: f64,
    /// Stimulus edges where artifacts are injected, seconds.
    pub edges: Vec<f64>,
}

impl Default for NeuralResponseModel {
    fn default() -> Self {
        Self {
            r_min: 2.0,
            r_max: 40.0,
            ramp_start_v: 0.5,
            plateau_start_v: 3.0,
            plateau_end_v: 3.5,
            drop_v: 4.0,
            drop_fraction: 0.235,
            duration: 1.5,
            noise_sd: 10e-6,
            spike_amplitude: 100e-6,
            spike_width: 0.6e-3,
            artifact_gain: 0.5e-3,
            artifact_tau: 2e-3,
            edges: vec![0.0, 0.5, 1.0],
        }
    }
}

/// Expected firing rate at stimulation voltage `v`. Zero below the ramp
/// onset; held at the dropped level above `drop_v`.
pub fn expected_rate(model: &NeuralResponseModel, v: f64) -> f64 {
    let m = model;
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    if v < m.ramp_start_v {
        0.0
    } else if v < m.plateau_start_v {
        lerp(m.r_min, m.r_max, (v - m.ramp_start_v) / (m.plateau_start_v - m.ramp_start_v))
    } else if v <= m.plateau_end_v {
        m.r_max
    } else if v < m.drop_v {
        let dropped = m.r_max * (1.0 - m.drop_fraction);
        lerp(m.r_max, dropped, (v - m.plateau_end_v) / (m.drop_v - m.plateau_end_v))
    } else {
        m.r_max * (1.0 - m.drop_fraction)
    }
}

impl NeuralResponseModel {
    /// Spike times kept at voltage `v` for `seed`.
    pub fn event_times(&self, v: f64, seed: u64) -> Vec<f64> {
        let mut rng = rng::child_rng(seed, "neural-events", 0);
        let keep_p = expected_rate(self, v) / self.r_max;
        let gap = Exp::new(self.r_max).expect("positive r_max");
        let mut times = Vec::new();
        let mut t = gap.sample(&mut rng);
        while t < self.duration {
            let u: f64 = rng.random();
            if u < keep_p {
                times.push(t);
            }
            t += gap.sample(&mut rng);
        }
        times
    }

    pub fn generate(&self, v: f64, seed: u64, sample_rate: f64) -> Result<Trace, SignalError> {
        if !(0.0..=5.0).contains(&v) {
            return Err(SignalError::VoltageOutOfRange(v));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(SignalError::InvalidSampleRate(sample_rate));
        }
        let len = (self.duration * sample_rate).round() as usize;
        let mut noise_rng = rng::child_rng(seed, "neural-noise", 0);
        let noise = Normal::new(0.0, self.noise_sd).expect("finite noise sd");
        let mut samples: Vec<f64> = (0..len).map(|_| noise.sample(&mut noise_rng)).collect();

        let width = ((self.spike_width * sample_rate).round() as usize).max(1);
        for t in self.event_times(v, seed) {
            let start = (t * sample_rate).round() as usize;
            for k in 0..width {
                if let Some(s) = samples.get_mut(start + k) {
                    *s += self.spike_amplitude * (2.0 * PI * k as f64 / width as f64).sin();
                }
            }
        }

        let artifact_len = ((10.0 * self.artifact_tau * sample_rate).ceil() as usize).max(1);
        for (j, &edge) in self.edges.iter().enumerate() {
            let start = (edge * sample_rate).round() as usize;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            for k in 0..artifact_len {
                if let Some(s) = samples.get_mut(start + k) {
                    let dt = k as f64 / sample_rate;
                    *s += sign * self.artifact_gain * v * (-dt / self.artifact_tau).exp();
                }
            }
        }
        Ok(Trace::new(sample_rate, samples))
    }
}

/// Synthetic recording during a single bipolar pulse at `stim_voltage`.
pub fn synth_neural_response(stim_voltage: f64, rng_seed: u64, sample_rate: f64) -> Result<Trace, SignalError> {
    NeuralResponseModel::default().generate(stim_voltage, rng_seed, sample_rate)
}
