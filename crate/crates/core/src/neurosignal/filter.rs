//! Digital Butterworth bandpass.
//!
//! The analog lowpass prototype of order `N` is mapped to a bandpass with
//! `s -> (s^2 + w0^2) / (B s)`, where the band edges are prewarped so the
//! bilinear transform puts the -3 dB points exactly at the requested
//! frequencies. The resulting `2N` poles are grouped into `N` second-order
//! sections, each with zeros at DC and Nyquist.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{SignalError, Trace};

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Frequency response at normalized angular frequency `omega` (rad/sample).
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (1.0 + self.a1 * z1 + self.a2 * z2)
    }

    /// Transposed direct form II with zero initial state.
    fn filter_in_place(&self, samples: &mut [f64]) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for x in samples.iter_mut() {
            let input = *x;
            let y = self.b0 * input + s1;
            s1 = self.b1 * input - self.a1 * y + s2;
            s2 = self.b2 * input - self.a2 * y;
            *x = y;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthBandpass {
    pub low: f64,
    pub high: f64,
    pub order: usize,
    pub sample_rate: f64,
    pub sections: Vec<Biquad>,
}

impl ButterworthBandpass {
    pub fn design(low: f64, high: f64, order: usize, sample_rate: f64) -> Result<Self, SignalError> {
        if order == 0 {
            return Err(SignalError::ZeroOrder);
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(SignalError::InvalidSampleRate(sample_rate));
        }
        if !(low > 0.0 && low < high && high < sample_rate / 2.0) {
            return Err(SignalError::InvalidBand { low, high, sample_rate });
        }

        let fs2 = 2.0 * sample_rate;
        let warp = |f: f64| fs2 * (PI * f / sample_rate).tan();
        let (wl, wh) = (warp(low), warp(high));
        let bw = wh - wl;
        let w0_sq = wl * wh;

        let mut poles = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta);
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0_sq).sqrt();
            for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
                poles.push((fs2 + s) / (fs2 - s));
            }
        }

        let eps = 1e-12;
        let mut pairs: Vec<(Complex64, Complex64)> = poles
            .iter()
            .filter(|z| z.im > eps)
            .map(|&z| (z, z.conj()))
            .collect();
        let mut real: Vec<f64> = poles.iter().filter(|z| z.im.abs() <= eps).map(|z| z.re).collect();
        real.sort_by(f64::total_cmp);
        for chunk in real.chunks(2) {
            let second = chunk.get(1).copied().unwrap_or(0.0);
            pairs.push((Complex64::new(chunk[0], 0.0), Complex64::new(second, 0.0)));
        }
        debug_assert_eq!(pairs.len(), order);

        // Digital image of the analog center frequency, where |H| = 1.
        let omega0 = 2.0 * (w0_sq.sqrt() / fs2).atan();
        let sections = pairs
            .into_iter()
            .map(|(z1, z2)| {
                let mut section = Biquad {
                    b0: 1.0,
                    b1: 0.0,
                    b2: -1.0,
                    a1: -(z1 + z2).re,
                    a2: (z1 * z2).re,
                };
                let gain = 1.0 / section.response(omega0).norm();
                section.b0 *= gain;
                section.b2 *= gain;
                section
            })
            .collect();

        Ok(Self { low, high, order, sample_rate, sections })
    }

    /// Magnitude of the cascade at `freq` Hz.
    pub fn magnitude(&self, freq: f64) -> f64 {
        let omega = 2.0 * PI * freq / self.sample_rate;
        self.sections.iter().map(|s| s.response(omega).norm()).product()
    }

    pub fn apply(&self, samples: &mut [f64]) {
        for section in &self.sections {
            section.filter_in_place(samples);
        }
    }
}

/// Causal bandpass filtering with zero initial state. `order` is the order
/// of the lowpass prototype, so the cascade has `order` biquads.
pub fn bandpass(t: &Trace, low: f64, high: f64, order: usize) -> Result<Trace, SignalError> {
    let design = ButterworthBandpass::design(low, high, order, t.sample_rate)?;
    let mut samples = t.samples.clone();
    design.apply(&mut samples);
    Ok(Trace::new(t.sample_rate, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Analog Butterworth bandpass magnitude at the prewarped frequency.
    fn oracle(freq: f64, low: f64, high: f64, order: i32, fs: f64) -> f64 {
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (w, wl, wh) = (warp(freq), warp(low), warp(high));
        let eps = (w * w - wl * wh) / ((wh - wl) * w);
        1.0 / (1.0 + eps.powi(2 * order)).sqrt()
    }

    #[test]
    fn design_matches_analog_oracle() {
        let fs = 25_000.0;
        for order in 1..=4 {
            let d = ButterworthBandpass::design(300.0, 5000.0, order, fs).unwrap();
            assert_eq!(d.sections.len(), order);
            for f in [20.0, 50.0, 300.0, 1200.0, 5000.0, 8000.0, 10_000.0, 12_000.0] {
                let got = d.magnitude(f);
                let want = oracle(f, 300.0, 5000.0, order as i32, fs);
                assert!((got - want).abs() < 1e-9 * want.max(1e-6), "order {order} f {f}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn band_edges_are_minus_three_db() {
        let d = ButterworthBandpass::design(300.0, 5000.0, 2, 25_000.0).unwrap();
        for f in [300.0, 5000.0] {
            assert!((20.0 * d.magnitude(f).log10() + 3.0103).abs() < 1e-6);
        }
    }

    #[test]
    fn zeros_stay_zero() {
        let t = Trace::zeros(25_000.0, 1000);
        assert_eq!(bandpass(&t, 300.0, 5000.0, 2).unwrap(), t);
    }

    #[test]
    fn impulse_response_decays() {
        let mut samples = vec![0.0; 5000];
        samples[0] = 1.0;
        let out = bandpass(&Trace::new(25_000.0, samples), 300.0, 5000.0, 2).unwrap();
        let tail: f64 = out.samples[4000..].iter().map(|v| v.abs()).sum();
        assert!(tail < 1e-6);
    }

    #[test]
    fn rejects_bad_bands() {
        let t = Trace::zeros(8000.0, 10);
        assert!(matches!(bandpass(&t, 300.0, 5000.0, 2), Err(SignalError::InvalidBand { .. })));
        let t = Trace::zeros(25_000.0, 10);
        assert!(bandpass(&t, 5000.0, 300.0, 2).is_err());
        assert!(bandpass(&t, 0.0, 300.0, 2).is_err());
        assert!(matches!(bandpass(&t, 300.0, 5000.0, 0), Err(SignalError::ZeroOrder)));
    }
}
