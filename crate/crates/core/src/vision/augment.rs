use super::{Mask, VisionError};

/// Scale by `(scale_x, scale_y)` and then rotate by `rotation_deg` about the
/// mask center, resampling the binary field bilinearly and keeping pixels
/// whose interpolated value is at least 0.5. Output size equals input size;
/// anything mapped from outside the frame is background.
///
/// Rotation is counterclockwise in (column, row) coordinates, which appears
/// clockwise on screen because rows grow downward.
pub fn augment(mask: &Mask, scale_x: f64, scale_y: f64, rotation_deg: f64) -> Result<Mask, VisionError> {
    if !(scale_x > 0.0 && scale_y > 0.0) {
        return Err(VisionError::NonPositiveScale(scale_x, scale_y));
    }
    let cx = (mask.width() as f64 - 1.0) / 2.0;
    let cy = (mask.height() as f64 - 1.0) / 2.0;
    let (sin, cos) = rotation_deg.to_radians().sin_cos();

    Ok(Mask::from_fn(mask.width(), mask.height(), |u, v| {
        // Undo the rotation, then the scaling.
        let qx = u as f64 - cx;
        let qy = v as f64 - cy;
        let rx = cos * qx + sin * qy;
        let ry = -sin * qx + cos * qy;
        sample_bilinear(mask, rx / scale_x + cx, ry / scale_y + cy) >= 0.5
    }))
}

fn sample_bilinear(mask: &Mask, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let at = |xi: f64, yi: f64| -> f64 {
        if xi < 0.0 || yi < 0.0 || xi >= mask.width() as f64 || yi >= mask.height() as f64 {
            return 0.0;
        }
        if mask.get(xi as usize, yi as usize) {
            1.0
        } else {
            0.0
        }
    };
    let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1.0, y0) * fx;
    let bottom = at(x0, y0 + 1.0) * (1.0 - fx) + at(x0 + 1.0, y0 + 1.0) * fx;
    top * (1.0 - fy) + bottom * fy
}
