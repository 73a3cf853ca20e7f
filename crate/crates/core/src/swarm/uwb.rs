//! Simulated UWB ranging and 2-D multilateration.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Arena, SwarmError};

pub const MAX_ITERATIONS: usize = 50;
/// Gauss-Newton stops once a step is shorter than this, meters.
pub const STEP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UwbSystem {
    pub anchors: Vec<[f64; 2]>,
    /// Range noise standard deviation, meters.
    pub range_noise_sd: f64,
}

impl UwbSystem {
    /// Anchors on the corners of a `side` x `side` square whose lower-left
    /// corner is `origin`, listed counterclockwise from `origin`.
    pub fn square(origin: [f64; 2], side: f64, range_noise_sd: f64) -> Self {
        let [x, y] = origin;
        Self {
            anchors: vec![[x, y], [x + side, y], [x + side, y + side], [x, y + side]],
            range_noise_sd,
        }
    }

    /// 3.6 m anchor square centered on the arena, 5 cm range noise.
    pub fn around(arena: &Arena) -> Self {
        let side = 3.6;
        let origin = [0.5 * (arena.width - side), 0.5 * (arena.height - side)];
        Self::square(origin, side, 0.05)
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.anchors.len() as f64;
        let (sx, sy) = self.anchors.iter().fold((0.0, 0.0), |(sx, sy), a| (sx + a[0], sy + a[1]));
        [sx / n, sy / n]
    }

    pub fn validate(&self) -> Result<(), SwarmError> {
        if self.anchors.len() < 3 {
            return Err(SwarmError::InvalidConfig("UWB needs at least 3 anchors".into()));
        }
        if !(self.range_noise_sd >= 0.0) {
            return Err(SwarmError::InvalidConfig("UWB range noise SD must be >= 0".into()));
        }
        let a0 = self.anchors[0];
        let spread = self.anchors.iter().skip(1).any(|a| {
            self.anchors.iter().skip(1).any(|b| {
                let cross = (a[0] - a0[0]) * (b[1] - a0[1]) - (a[1] - a0[1]) * (b[0] - a0[0]);
                cross.abs() > 1e-9
            })
        });
        if !spread {
            return Err(SwarmError::InvalidConfig("UWB anchors are collinear".into()));
        }
        Ok(())
    }
}

fn distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// True distance to every anchor plus independent Gaussian noise.
pub fn simulate_ranges<R: Rng + ?Sized>(true_pos: [f64; 2], uwb: &UwbSystem, rng: &mut R) -> Vec<f64> {
    let noise = (uwb.range_noise_sd > 0.0).then(|| Normal::new(0.0, uwb.range_noise_sd).expect("finite sd"));
    uwb.anchors
        .iter()
        .map(|&a| {
            let d = distance(true_pos, a);
            match &noise {
                Some(n) => d + n.sample(rng),
                None => d,
            }
        })
        .collect()
}

/// Result of one multilateration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fix {
    pub position: [f64; 2],
    /// Root-mean-square range residual at `position`, meters.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn rms_residual(p: [f64; 2], ranges: &[f64], anchors: &[[f64; 2]]) -> f64 {
    let sum: f64 = ranges.iter().zip(anchors).map(|(&r, &a)| (r - distance(p, a)).powi(2)).sum();
    (sum / ranges.len() as f64).sqrt()
}

/// Gauss-Newton least squares on `r_i - |p - a_i|`, starting from
/// `initial_guess` or the anchor centroid. When the iteration limit is hit
/// the lowest-residual iterate is returned with `converged == false`.
pub fn multilaterate(ranges: &[f64], uwb: &UwbSystem, initial_guess: Option<[f64; 2]>) -> Result<Fix, SwarmError> {
    let finite = ranges.iter().filter(|r| r.is_finite()).count();
    if ranges.len() != uwb.anchors.len() || finite < 3 {
        return Err(SwarmError::TooFewRanges { ranges: finite, anchors: uwb.anchors.len() });
    }
    let (ranges, anchors): (Vec<f64>, Vec<[f64; 2]>) = ranges
        .iter()
        .zip(&uwb.anchors)
        .filter(|(r, _)| r.is_finite())
        .map(|(&r, &a)| (r, a))
        .unzip();

    let mut p = initial_guess.unwrap_or_else(|| uwb.centroid());
    let mut best = (rms_residual(p, &ranges, &anchors), p);
    for iter in 1..=MAX_ITERATIONS {
        // Normal equations J^T J dp = J^T e for the 2x2 case.
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&r, &a) in ranges.iter().zip(&anchors) {
            let d = distance(p, a);
            if d < 1e-12 {
                continue;
            }
            let (jx, jy) = ((p[0] - a[0]) / d, (p[1] - a[1]) / d);
            let e = r - d;
            a11 += jx * jx;
            a12 += jx * jy;
            a22 += jy * jy;
            b1 += jx * e;
            b2 += jy * e;
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-15 {
            break;
        }
        let dx = (a22 * b1 - a12 * b2) / det;
        let dy = (a11 * b2 - a12 * b1) / det;
        p = [p[0] + dx, p[1] + dy];
        let res = rms_residual(p, &ranges, &anchors);
        if res < best.0 {
            best = (res, p);
        }
        if dx.hypot(dy) < STEP_TOLERANCE {
            return Ok(Fix { position: p, residual: res, iterations: iter, converged: true });
        }
    }
    Ok(Fix { position: best.1, residual: best.0, iterations: MAX_ITERATIONS, converged: false })
}
