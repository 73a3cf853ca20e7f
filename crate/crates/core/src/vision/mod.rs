//! Pronotum masks and the implantation reference point.
//!
//! The reference point `p_R` is the middle of the posterior pronotum edge:
//! the posterior-most mask row, at the mean column of its foreground pixels.

mod augment;
mod metrics;
mod pgm;
mod synth;

pub use augment::augment;
pub use metrics::{dsc, evaluate_pairs, iou, metrics_csv, mse_pr, PairMetrics, SegMetrics};
pub use pgm::{read_pgm, write_pgm};
pub use synth::{synth_pronotum, ShieldParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Side length of the crop fed to the segmentation models.
pub const DEFAULT_MASK_SIZE: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VisionError {
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("point lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("point lists are empty")]
    EmptyPoints,
    #[error("scale factors must be positive, got ({0}, {1})")]
    NonPositiveScale(f64, f64),
    #[error("bit buffer length {got} does not match {width}x{height}")]
    BadBuffer { width: usize, height: usize, got: usize },
    #[error("PGM parse error: {0}")]
    Pgm(String),
}

/// Row-major binary raster. `(x, y)` is (column, row).
#[derive(Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for Mask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("area", &self.area())
            .finish()
    }
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, VisionError> {
        if bits.len() != width * height {
            return Err(VisionError::BadBuffer { width, height, got: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn mirror_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    fn row(&self, y: usize) -> &[bool] {
        &self.bits[y * self.width..(y + 1) * self.width]
    }

    fn same_shape(&self, other: &Mask) -> Result<(), VisionError> {
        if self.width != other.width || self.height != other.height {
            return Err(VisionError::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

/// Pixel coordinates of `p_R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub x: usize,
    pub y: usize,
}

/// Which image direction points toward the insect's posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosteriorDirection {
    /// Posterior is toward larger row indices.
    #[default]
    PlusY,
    /// Posterior is toward row 0.
    MinusY,
}

pub fn extract_reference_point(
    mask: &Mask,
    posterior: PosteriorDirection,
) -> Result<ReferencePoint, VisionError> {
    let occupied = |y: &usize| mask.row(*y).iter().any(|&b| b);
    let y = match posterior {
        PosteriorDirection::PlusY => (0..mask.height).rev().find(occupied),
        PosteriorDirection::MinusY => (0..mask.height).find(occupied),
    }
    .ok_or(VisionError::EmptyMask)?;

    let (sum, count) = mask
        .row(y)
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold((0usize, 0usize), |(s, c), (x, _)| (s + x, c + 1));
    // f64::round rounds half away from zero.
    let x = (sum as f64 / count as f64).round() as usize;
    Ok(ReferencePoint { x, y })
}

/// Anything that turns an input raster into a pronotum mask. Real networks
/// live outside this crate; their outputs are scored via files.
pub trait Segmenter {
    fn segment(&self, input: &Mask) -> Mask;
}

impl<F: Fn(&Mask) -> Mask> Segmenter for F {
    fn segment(&self, input: &Mask) -> Mask {
        self(input)
    }
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentitySegmenter;

impl Segmenter for IdentitySegmenter {
    fn segment(&self, input: &Mask) -> Mask {
        input.clone()
    }
}

/// Segment every input and score it against its ground truth.
pub fn score_segmenter<S: Segmenter + ?Sized>(
    model: &S,
    inputs: &[(String, Mask, Mask)],
    posterior: PosteriorDirection,
) -> Result<(Vec<PairMetrics>, SegMetrics), VisionError> {
    let pairs: Vec<(String, Mask, Mask)> =
        inputs.iter().map(|(id, input, truth)| (id.clone(), model.segment(input), truth.clone())).collect();
    evaluate_pairs(&pairs, posterior)
}
