use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Mask, ReferencePoint, DEFAULT_MASK_SIZE};
use crate::rng;

/// Shape ranges for the synthetic pronotum generator.
///
/// The shield is the region above a flat posterior edge at row `edge_row`,
/// bounded by the superellipse `|dx/a|^p + |dy/b|^p <= 1` (`dy` measured
/// anteriorly from the edge). The edge spans `center_x ± half_width` so its
/// midpoint lands exactly on `center_x`, which makes the ground truth exact.
///
/// With the defaults every shape stays at least 20 px inside a 256 px frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShieldParams {
    pub size: usize,
    pub center_x: RangeInclusive<usize>,
    pub edge_row: RangeInclusive<usize>,
    pub half_width: RangeInclusive<f64>,
    pub length: RangeInclusive<f64>,
    pub exponent: RangeInclusive<f64>,
}

impl Default for ShieldParams {
    fn default() -> Self {
        Self {
            size: DEFAULT_MASK_SIZE,
            center_x: 108..=148,
            edge_row: 150..=215,
            half_width: 55.0..=85.0,
            length: 70.0..=120.0,
            exponent: 1.6..=3.0,
        }
    }
}

/// Generate a shield-shaped pronotum mask and its exact reference point.
pub fn synth_pronotum(params: &ShieldParams, rng_seed: u64) -> (Mask, ReferencePoint) {
    let mut rng = rng::seeded(rng_seed);
    let size = params.size;
    let margin = 2usize;

    let cx = rng.random_range(params.center_x.clone()).clamp(margin, size - 1 - margin);
    let edge = rng.random_range(params.edge_row.clone()).clamp(margin, size - 1 - margin);
    let max_half = (cx - margin).min(size - 1 - margin - cx) as f64;
    let a = rng.random_range(params.half_width.clone()).min(max_half);
    let b = rng.random_range(params.length.clone()).min((edge - margin) as f64);
    let p = rng.random_range(params.exponent.clone());

    let mask = Mask::from_fn(size, size, |x, y| {
        if y > edge {
            return false;
        }
        let t = (edge - y) as f64 / b;
        if t > 1.0 {
            return false;
        }
        let reach = a * (1.0 - t.powf(p)).powf(1.0 / p);
        (x as f64 - cx as f64).abs() <= reach
    });
    (mask, ReferencePoint { x: cx, y: edge })
}
