//! Seam-blended decoding and the latitude loss weighting.

use crate::error::{Error, Result};
use crate::raster::{rotate_180, EquirectFrame, Raster, Rgb};

/// Triangular column weight: 0 at the seam, 1 at the centre column.
pub fn seam_weight(i: usize, width: usize) -> Result<f64> {
    if i >= width {
        return Err(Error::invalid(format!("column {i} outside width {width}")));
    }
    Ok(seam_weight_unchecked(i, width))
}

#[inline]
fn seam_weight_unchecked(i: usize, width: usize) -> f64 {
    1.0 - 2.0 * (i as f64 / width as f64 - 0.5).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeamWeightProfile {
    pub width: usize,
    pub weights: Vec<f64>,
}

impl SeamWeightProfile {
    pub fn new(width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("width must be positive"));
        }
        Ok(Self {
            width,
            weights: (0..width).map(|i| seam_weight_unchecked(i, width)).collect(),
        })
    }
}

/// Merges a frame with its 180-degree-offset regeneration.
///
/// `rotated` lives in the half-turned frame, so it is turned back before
/// mixing; each column then takes `h(i)` of `frame` and `1 - h(i)` of the
/// realigned copy, which pushes each operand's seam under zero weight.
/// Masks are OR-combined.
pub fn blend_pair(frame: &EquirectFrame, rotated: &EquirectFrame) -> Result<EquirectFrame> {
    if frame.width() != rotated.width() || frame.height() != rotated.height() {
        return Err(Error::invalid(format!(
            "cannot blend {}x{} with {}x{}",
            frame.width(),
            frame.height(),
            rotated.width(),
            rotated.height()
        )));
    }
    let aligned = rotate_180(rotated)?;
    let w = frame.width();
    let other: Vec<f32> = (0..w)
        .map(|i| (1.0 - seam_weight_unchecked(i, w)) as f32)
        .collect();

    let rgb: Vec<Rgb> = frame
        .pixels()
        .iter()
        .zip(aligned.pixels())
        .enumerate()
        .map(|(idx, (y, a))| {
            let t = other[idx % w];
            // y + t (a - y): exact when the operands agree
            let mut out = [0.0f32; 3];
            for k in 0..3 {
                out[k] = (y[k] + t * (a[k] - y[k])).clamp(0.0, 1.0);
            }
            out
        })
        .collect();
    let mask = frame
        .mask()
        .iter()
        .zip(aligned.mask())
        .map(|(a, b)| *a || *b)
        .collect();
    EquirectFrame::new(w, frame.height(), rgb, mask)
}

/// `(1/2 - |1/2 - h|)^2 + delta` for a normalized height `h` in `[0, 1]`.
pub fn latitude_weight(h: f64, delta: f64) -> f64 {
    let c = 0.5 - (0.5 - h).abs();
    c * c + delta
}

pub const DEFAULT_LATITUDE_DELTA: f64 = 0.01;

/// Per-row loss weights, largest at the equator.
#[derive(Debug, Clone, PartialEq)]
pub struct LatitudeWeightMap {
    pub height: usize,
    pub delta: f64,
    pub weights: Vec<f64>,
}

impl LatitudeWeightMap {
    /// Lower bound of the weights (reached at the poles).
    pub fn floor(&self) -> f64 {
        self.delta
    }

    /// Upper bound of the weights (reached at the equator).
    pub fn ceiling(&self) -> f64 {
        0.25 + self.delta
    }
}

/// Row `r` is weighted at its centre, `h = (r + 0.5) / height`.
pub fn latitude_weights(height: usize, delta: f64) -> Result<LatitudeWeightMap> {
    if height < 2 {
        return Err(Error::invalid(format!("height must be at least 2, got {height}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    // |1/2 - h| evaluated as |2r + 1 - H| / 2H keeps mirrored rows bit-equal
    let weights = (0..height)
        .map(|r| {
            let off = (2 * r as i64 + 1 - height as i64).unsigned_abs() as f64;
            let c = 0.5 - off / (2 * height) as f64;
            c * c + delta
        })
        .collect();
    Ok(LatitudeWeightMap {
        height,
        delta,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::circular_shift;

    #[test]
    fn seam_weight_examples() {
        assert_eq!(seam_weight(0, 1024).unwrap(), 0.0);
        assert_eq!(seam_weight(512, 1024).unwrap(), 1.0);
        assert_eq!(seam_weight(256, 1024).unwrap(), 0.5);
        assert!(seam_weight(1024, 1024).is_err());
    }

    #[test]
    fn seam_weights_are_complementary_under_half_turn() {
        for &w in &[2usize, 8, 100, 1024] {
            let p = SeamWeightProfile::new(w).unwrap();
            for i in 0..w {
                assert!((p.weights[i] + p.weights[(i + w / 2) % w] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn consistent_pair_is_identity() {
        let f = EquirectFrame::from_fn(16, |x, y| {
            [(x as f32 * 0.37).sin().abs(), y as f32 / 16.0, 0.3]
        })
        .unwrap();
        let r = rotate_180(&f).unwrap();
        assert_eq!(blend_pair(&f, &r).unwrap(), f);
    }

    #[test]
    fn black_and_white_blend_follows_weights() {
        let black = EquirectFrame::filled(8, [0.0; 3]).unwrap();
        let white = EquirectFrame::filled(8, [1.0; 3]).unwrap();
        let out = blend_pair(&black, &white).unwrap();
        for x in 0..16 {
            let expected = (1.0 - seam_weight(x, 16).unwrap()) as f32;
            assert_eq!(out.pixel(x, 3), [expected; 3]);
        }
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let a = EquirectFrame::filled(8, [0.0; 3]).unwrap();
        let b = EquirectFrame::filled(16, [0.0; 3]).unwrap();
        assert!(blend_pair(&a, &b).is_err());
    }

    #[test]
    fn masks_are_or_combined() {
        let n = 16 * 8;
        let a = EquirectFrame::new(16, 8, vec![[0.0; 3]; n], (0..n).map(|i| i % 16 < 4).collect())
            .unwrap();
        // after realignment this covers columns 8..12
        let b = circular_shift(
            &EquirectFrame::new(16, 8, vec![[0.0; 3]; n], (0..n).map(|i| (8..12).contains(&(i % 16))).collect())
                .unwrap(),
            8,
        );
        let out = blend_pair(&a, &b).unwrap();
        for (i, &m) in out.mask().iter().enumerate() {
            let c = i % 16;
            assert_eq!(m, c < 4 || (8..12).contains(&c));
        }
    }

    #[test]
    fn latitude_examples() {
        let d = 0.01;
        assert_eq!(latitude_weight(0.5, d), 0.25 + d);
        assert_eq!(latitude_weight(0.0, d), d);
        assert_eq!(latitude_weight(1.0, d), d);
        assert_eq!(latitude_weight(0.25, d), 0.0625 + d);
        let m = latitude_weights(512, d).unwrap();
        for r in 0..512 {
            assert_eq!(m.weights[r], m.weights[511 - r]);
            assert!(m.weights[r] > m.floor() && m.weights[r] <= m.ceiling());
        }
        assert!(latitude_weights(1, d).is_err());
        assert!(latitude_weights(8, 0.0).is_err());
    }
}
