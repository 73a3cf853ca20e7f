use serde::{Deserialize, Serialize};

/// Plated conductor of the bipolar electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectrodeModel {
    /// S/m.
    pub conductivity: f64,
    pub plating_thickness: f64,
    pub trace_length: f64,
    pub trace_width: f64,
}

impl Default for ElectrodeModel {
    fn default() -> Self {
        Self { conductivity: 3.12e7, plating_thickness: 2.5e-6, trace_length: 30e-3, trace_width: 0.5e-3 }
    }
}

/// DC resistance of a rectangular plated trace, `L / (sigma * w * t)`.
pub fn electrode_resistance(e: &ElectrodeModel) -> f64 {
    e.trace_length / (e.conductivity * e.trace_width * e.plating_thickness)
}
