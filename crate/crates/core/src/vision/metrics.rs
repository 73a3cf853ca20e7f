use rayon::prelude::*;
use serde::Serialize;

use super::{extract_reference_point, Mask, PosteriorDirection, ReferencePoint, VisionError};

/// Intersection over union. Two empty masks agree perfectly.
pub fn iou(a: &Mask, b: &Mask) -> Result<f64, VisionError> {
    let (inter, union, _, _) = overlap_counts(a, b)?;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Dice similarity coefficient. Two empty masks agree perfectly.
pub fn dsc(a: &Mask, b: &Mask) -> Result<f64, VisionError> {
    let (inter, _, area_a, area_b) = overlap_counts(a, b)?;
    if area_a + area_b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (area_a + area_b) as f64)
}

fn overlap_counts(a: &Mask, b: &Mask) -> Result<(usize, usize, usize, usize), VisionError> {
    a.same_shape(b)?;
    let mut inter = 0;
    let mut union = 0;
    let mut area_a = 0;
    let mut area_b = 0;
    for (&pa, &pb) in a.bits().iter().zip(b.bits()) {
        inter += (pa && pb) as usize;
        union += (pa || pb) as usize;
        area_a += pa as usize;
        area_b += pb as usize;
    }
    Ok((inter, union, area_a, area_b))
}

fn squared_distance(p: &ReferencePoint, q: &ReferencePoint) -> f64 {
    let dx = p.x as f64 - q.x as f64;
    let dy = p.y as f64 - q.y as f64;
    dx * dx + dy * dy
}

/// Mean squared Euclidean pixel distance between paired reference points.
pub fn mse_pr(predicted: &[ReferencePoint], truth: &[ReferencePoint]) -> Result<f64, VisionError> {
    if predicted.len() != truth.len() {
        return Err(VisionError::LengthMismatch(predicted.len(), truth.len()));
    }
    if predicted.is_empty() {
        return Err(VisionError::EmptyPoints);
    }
    let total: f64 = predicted.iter().zip(truth).map(|(p, t)| squared_distance(p, t)).sum();
    Ok(total / predicted.len() as f64)
}

/// Scores for one predicted/truth mask pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMetrics {
    pub id: String,
    pub iou: f64,
    pub dsc: f64,
    pub pr_err_sq: f64,
}

/// Dataset-level means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegMetrics {
    pub miou: f64,
    pub mdsc: f64,
    /// Squared pixels.
    pub mse_pr: f64,
}

/// Score every `(id, predicted, truth)` triple and the dataset means.
pub fn evaluate_pairs(
    pairs: &[(String, Mask, Mask)],
    posterior: PosteriorDirection,
) -> Result<(Vec<PairMetrics>, SegMetrics), VisionError> {
    if pairs.is_empty() {
        return Err(VisionError::EmptyPoints);
    }
    let rows = pairs
        .par_iter()
        .map(|(id, pred, truth)| {
            let p = extract_reference_point(pred, posterior)?;
            let t = extract_reference_point(truth, posterior)?;
            Ok(PairMetrics {
                id: id.clone(),
                iou: iou(pred, truth)?,
                dsc: dsc(pred, truth)?,
                pr_err_sq: squared_distance(&p, &t),
            })
        })
        .collect::<Result<Vec<_>, VisionError>>()?;
    let n = rows.len() as f64;
    let summary = SegMetrics {
        miou: rows.iter().map(|r| r.iou).sum::<f64>() / n,
        mdsc: rows.iter().map(|r| r.dsc).sum::<f64>() / n,
        mse_pr: rows.iter().map(|r| r.pr_err_sq).sum::<f64>() / n,
    };
    Ok((rows, summary))
}

/// CSV with columns `id,iou,dsc,pr_err_sq` and a final `mean` row.
pub fn metrics_csv(rows: &[PairMetrics], summary: &SegMetrics) -> String {
    let mut out = String::from("id,iou,dsc,pr_err_sq\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.id, r.iou, r.dsc, r.pr_err_sq));
    }
    out.push_str(&format!("mean,{},{},{}\n", summary.miou, summary.mdsc, summary.mse_pr));
    out
}
