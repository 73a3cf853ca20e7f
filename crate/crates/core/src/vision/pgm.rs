//! ASCII PGM (`P2`) mask files with `maxval` 1.

use super::{Mask, VisionError};

/// Serialize a mask as `P2`, one raster row per line.
pub fn write_pgm(mask: &Mask) -> String {
    let mut out = format!("P2\n{} {}\n1\n", mask.width(), mask.height());
    for y in 0..mask.height() {
        let row: Vec<&str> = (0..mask.width())
            .map(|x| if mask.get(x, y) { "1" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parse a `P2` file. Any nonzero sample is foreground, so masks saved with
/// a larger `maxval` (e.g. 255) are accepted as well.
pub fn read_pgm(text: &str) -> Result<Mask, VisionError> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let err = |m: &str| VisionError::Pgm(m.to_string());

    if tokens.next() != Some("P2") {
        return Err(err("missing P2 magic"));
    }
    let mut header = |name: &str| -> Result<usize, VisionError> {
        tokens
            .next()
            .ok_or_else(|| err(&format!("missing {name}")))?
            .parse::<usize>()
            .map_err(|e| err(&format!("bad {name}: {e}")))
    };
    let width = header("width")?;
    let height = header("height")?;
    let maxval = header("maxval")?;
    if maxval == 0 {
        return Err(err("maxval must be positive"));
    }

    let mut bits = Vec::with_capacity(width * height);
    for tok in tokens {
        let v: usize = tok.parse().map_err(|e| err(&format!("bad sample {tok:?}: {e}")))?;
        if v > maxval {
            return Err(err(&format!("sample {v} exceeds maxval {maxval}")));
        }
        bits.push(v > 0);
    }
    if bits.len() != width * height {
        return Err(err(&format!("expected {} samples, found {}", width * height, bits.len())));
    }
    Mask::from_bits(width, height, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_expected_text() {
        let mut m = Mask::new(3, 2);
        m.set(1, 0, true);
        m.set(2, 1, true);
        assert_eq!(write_pgm(&m), "P2\n3 2\n1\n0 1 0\n0 0 1\n");
    }

    #[test]
    fn reads_comments_and_wider_maxval() {
        let m = read_pgm("P2\n# made by hand\n2 2\n255\n0 255\n255 0\n").unwrap();
        assert!(m.get(1, 0) && m.get(0, 1) && !m.get(0, 0));
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_pgm("P5\n1 1\n1\n0\n").is_err());
        assert!(read_pgm("P2\n2 2\n1\n0 1 0\n").is_err());
        assert!(read_pgm("P2\n1 1\n1\n2\n").is_err());
        assert!(read_pgm("P2\n1 1\n1\nx\n").is_err());
    }
}
