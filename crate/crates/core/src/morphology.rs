//! Cockroach body geometry and the rod fixation rig.
//!
//! Rod A presses the anterior pronotum while Rod B holds the mesothorax.
//! Lowering Rod A by `d` lifts the posterior pronotum edge by `h`, which
//! opens the intersegmental membrane for the bipolar electrodes. The lift
//! follows a linear ramp that saturates at `h_max` once `d` reaches
//! `saturation_d`.

use std::ops::RangeInclusive;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

pub const PRONOTUM_LENGTH_RANGE: RangeInclusive<f64> = 11.6e-3..=13.4e-3;
pub const PRONOTUM_THICKNESS_RANGE: RangeInclusive<f64> = 0.5e-3..=0.6e-3;
pub const BODY_LENGTH_RANGE: RangeInclusive<f64> = 5.0e-2..=6.0e-2;
/// Third abdominal cuticle.
pub const ABDOMINAL_CUTICLE_LENGTH_RANGE: RangeInclusive<f64> = 3.8e-3..=5.0e-3;
pub const ABDOMINAL_CUTICLE_THICKNESS_RANGE: RangeInclusive<f64> = 0.2e-3..=0.3e-3;
pub const ANTENNA_DIAMETER_RANGE: RangeInclusive<f64> = 0.6e-3..=0.7e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorphologyError {
    #[error("lowered distance {d} m outside [0, {max}] m")]
    LoweredDistanceOutOfRange { d: f64, max: f64 },
    #[error("lifting height must be non-negative, got {0} m")]
    NegativeHeight(f64),
    #[error("invalid rig: {0}")]
    InvalidRig(&'static str),
}

/// Per-individual body dimensions, all in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsectMorphology {
    pub body_length: f64,
    pub pronotum_length: f64,
    pub pronotum_thickness: f64,
    pub abdominal_cuticle_length: f64,
    pub abdominal_cuticle_thickness: f64,
    pub antenna_diameter: f64,
    /// Additive deviation of this individual's saturated lift from the
    /// population curve. Zero unless the sampler was given a jitter.
    #[serde(default)]
    pub lift_offset: f64,
}

impl Default for InsectMorphology {
    /// Mid-range individual.
    fn default() -> Self {
        let mid = |r: RangeInclusive<f64>| 0.5 * (r.start() + r.end());
        Self {
            body_length: mid(BODY_LENGTH_RANGE),
            pronotum_length: mid(PRONOTUM_LENGTH_RANGE),
            pronotum_thickness: mid(PRONOTUM_THICKNESS_RANGE),
            abdominal_cuticle_length: mid(ABDOMINAL_CUTICLE_LENGTH_RANGE),
            abdominal_cuticle_thickness: mid(ABDOMINAL_CUTICLE_THICKNESS_RANGE),
            antenna_diameter: mid(ANTENNA_DIAMETER_RANGE),
            lift_offset: 0.0,
        }
    }
}

/// Rod-based fixation structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixationRig {
    /// Height of Rod A above the platform at `d = 0`.
    pub rod_a_initial_clearance: f64,
    /// How far Rod A is lowered.
    pub lowered_distance_d: f64,
    /// Lowered distance at which the lift saturates.
    pub saturation_d: f64,
    pub saturation_height_h_max: f64,
    pub electrode_thickness: f64,
}

impl Default for FixationRig {
    fn default() -> Self {
        Self {
            rod_a_initial_clearance: 4.0e-3,
            lowered_distance_d: 3.5e-3,
            saturation_d: 3.5e-3,
            saturation_height_h_max: 1.9e-3,
            electrode_thickness: 0.6e-3,
        }
    }
}

impl FixationRig {
    pub fn validate(&self) -> Result<(), MorphologyError> {
        if !(self.rod_a_initial_clearance > 0.0) {
            return Err(MorphologyError::InvalidRig("rod_a_initial_clearance must be > 0"));
        }
        if !(self.saturation_d > 0.0) {
            return Err(MorphologyError::InvalidRig("saturation_d must be > 0"));
        }
        if !(self.saturation_height_h_max >= 0.0) {
            return Err(MorphologyError::InvalidRig("saturation_height_h_max must be >= 0"));
        }
        if !(self.electrode_thickness > 0.0) {
            return Err(MorphologyError::InvalidRig("electrode_thickness must be > 0"));
        }
        check_d(self, self.lowered_distance_d)
    }

    /// Lift at the rig's configured lowered distance.
    pub fn configured_lift(&self) -> Result<f64, MorphologyError> {
        lifting_height(self, self.lowered_distance_d)
    }
}

fn check_d(rig: &FixationRig, d: f64) -> Result<(), MorphologyError> {
    if !(0.0..=rig.rod_a_initial_clearance).contains(&d) {
        return Err(MorphologyError::LoweredDistanceOutOfRange {
            d,
            max: rig.rod_a_initial_clearance,
        });
    }
    Ok(())
}

/// Pronotum lifting height `h` for a lowered distance `d`.
pub fn lifting_height(rig: &FixationRig, d: f64) -> Result<f64, MorphologyError> {
    check_d(rig, d)?;
    if d >= rig.saturation_d {
        return Ok(rig.saturation_height_h_max);
    }
    Ok(rig.saturation_height_h_max * d / rig.saturation_d)
}

/// Lifting height for one individual, including its `lift_offset`. The
/// offset is scaled along the ramp so that `h(0)` stays zero.
pub fn individual_lifting_height(
    rig: &FixationRig,
    morph: &InsectMorphology,
    d: f64,
) -> Result<f64, MorphologyError> {
    let h = lifting_height(rig, d)?;
    let ramp = d.min(rig.saturation_d) / rig.saturation_d;
    Ok((h + morph.lift_offset * ramp).max(0.0))
}

/// Whether a lift leaves room for the electrode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exposure {
    /// `h` exceeds one electrode thickness.
    pub sufficient: bool,
    /// `h` exceeds twice the electrode thickness.
    pub safety_margin: bool,
}

pub fn exposure_sufficient(rig: &FixationRig, h: f64) -> Result<Exposure, MorphologyError> {
    if !(h >= 0.0) {
        return Err(MorphologyError::NegativeHeight(h));
    }
    Ok(Exposure {
        sufficient: h > rig.electrode_thickness,
        safety_margin: h > 2.0 * rig.electrode_thickness,
    })
}

/// Uniform population sampler over the measured body-size ranges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorphologySampler {
    /// Standard deviation (m) of the per-individual additive lift offset.
    pub lift_jitter_sd: f64,
}

impl MorphologySampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> InsectMorphology {
        let mut draw = |r: RangeInclusive<f64>| rng.random_range(r);
        let mut morph = InsectMorphology {
            body_length: draw(BODY_LENGTH_RANGE),
            pronotum_length: draw(PRONOTUM_LENGTH_RANGE),
            pronotum_thickness: draw(PRONOTUM_THICKNESS_RANGE),
            abdominal_cuticle_length: draw(ABDOMINAL_CUTICLE_LENGTH_RANGE),
            abdominal_cuticle_thickness: draw(ABDOMINAL_CUTICLE_THICKNESS_RANGE),
            antenna_diameter: draw(ANTENNA_DIAMETER_RANGE),
            lift_offset: 0.0,
        };
        if self.lift_jitter_sd > 0.0 {
            let normal = Normal::new(0.0, self.lift_jitter_sd).expect("finite jitter");
            morph.lift_offset = normal.sample(rng);
        }
        morph
    }
}

/// Draw one individual from the population, deterministically per seed.
pub fn sample_morphology(rng_seed: u64) -> InsectMorphology {
    MorphologySampler::default().sample(&mut rng::seeded(rng_seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MM: f64 = 1e-3;

    #[test]
    fn lift_anchors() {
        let rig = FixationRig::default();
        assert_eq!(lifting_height(&rig, 0.0).unwrap(), 0.0);
        assert_eq!(lifting_height(&rig, 3.5 * MM).unwrap(), 1.9 * MM);
        assert!((lifting_height(&rig, 1.75 * MM).unwrap() - 0.95 * MM).abs() < 1e-15);
        assert_eq!(
            lifting_height(&rig, 3.5 * MM).unwrap(),
            lifting_height(&rig, 4.0 * MM).unwrap()
        );
    }

    #[test]
    fn lift_rejects_out_of_range() {
        let rig = FixationRig::default();
        assert!(matches!(
            lifting_height(&rig, -1e-6),
            Err(MorphologyError::LoweredDistanceOutOfRange { .. })
        ));
        assert!(lifting_height(&rig, 4.01 * MM).is_err());
        assert!(lifting_height(&rig, f64::NAN).is_err());
    }

    #[test]
    fn exposure_cases() {
        let rig = FixationRig::default();
        let e = exposure_sufficient(&rig, 1.9 * MM).unwrap();
        assert!(e.sufficient && e.safety_margin);
        let e = exposure_sufficient(&rig, 0.6 * MM).unwrap();
        assert!(!e.sufficient);
        let e = exposure_sufficient(&rig, 0.7 * MM).unwrap();
        assert!(e.sufficient && !e.safety_margin);
        assert!(exposure_sufficient(&rig, -0.1).is_err());
    }

    #[test]
    fn default_plateau_clears_twice_the_electrode() {
        let rig = FixationRig::default();
        assert!(rig.saturation_height_h_max > 2.0 * rig.electrode_thickness);
        for i in 0..=50 {
            let d = 3.5 * MM + 0.5 * MM * i as f64 / 50.0;
            let h = lifting_height(&rig, d).unwrap();
            assert!(exposure_sufficient(&rig, h).unwrap().sufficient);
        }
    }

    #[test]
    fn sampler_is_deterministic_and_in_range() {
        assert_eq!(sample_morphology(42), sample_morphology(42));
        let m = sample_morphology(42);
        assert!(PRONOTUM_LENGTH_RANGE.contains(&m.pronotum_length));
        assert_ne!(sample_morphology(42), sample_morphology(43));
    }

    #[test]
    fn monte_carlo_sweep_stays_inside_ranges() {
        let mut min_len = f64::INFINITY;
        let mut max_len = f64::NEG_INFINITY;
        for seed in 0..1000 {
            let m = sample_morphology(seed);
            assert!(BODY_LENGTH_RANGE.contains(&m.body_length));
            assert!(PRONOTUM_THICKNESS_RANGE.contains(&m.pronotum_thickness));
            assert!(ABDOMINAL_CUTICLE_LENGTH_RANGE.contains(&m.abdominal_cuticle_length));
            assert!(ABDOMINAL_CUTICLE_THICKNESS_RANGE.contains(&m.abdominal_cuticle_thickness));
            assert!(ANTENNA_DIAMETER_RANGE.contains(&m.antenna_diameter));
            min_len = min_len.min(m.pronotum_length);
            max_len = max_len.max(m.pronotum_length);
        }
        assert!(min_len >= 11.6 * MM && max_len <= 13.4 * MM);
        // A uniform sweep of 1000 draws should span most of the range.
        assert!(max_len - min_len > 1.7 * MM);
    }

    #[test]
    fn jitter_keeps_zero_lift_at_zero() {
        let sampler = MorphologySampler { lift_jitter_sd: 0.2 * MM };
        let m = sampler.sample(&mut rng::seeded(3));
        assert_ne!(m.lift_offset, 0.0);
        let rig = FixationRig::default();
        assert_eq!(individual_lifting_height(&rig, &m, 0.0).unwrap(), 0.0);
        let h = individual_lifting_height(&rig, &m, 3.5 * MM).unwrap();
        assert!((h - (1.9 * MM + m.lift_offset)).abs() < 1e-15);
    }

    #[test]
    fn morphology_json_is_si_meters() {
        let m = InsectMorphology::default();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"pronotum_length\":0.0125"));
        let back: InsectMorphology = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<InsectMorphology>(
            &json.replace("\"body_length\"", "\"body_len\"")
        )
        .is_err());
    }
}
