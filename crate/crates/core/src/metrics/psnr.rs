//! PSNR restricted to a pixel mask.

use crate::error::{Error, Result};
use crate::raster::{Raster, VideoClip};

/// Returned when the masked error is exactly zero.
pub const PSNR_CAP_DB: f64 = 100.0;

fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP_DB
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB)
    }
}

/// Sum of squared channel errors and the number of masked pixels.
fn masked_sse<F: Raster>(gt: &F, pred: &F, mask: &[bool]) -> Result<(f64, usize)> {
    if gt.width() != pred.width() || gt.height() != pred.height() {
        return Err(Error::invalid(format!(
            "shape mismatch: {}x{} vs {}x{}",
            gt.width(),
            gt.height(),
            pred.width(),
            pred.height()
        )));
    }
    if mask.len() != gt.pixels().len() {
        return Err(Error::invalid(format!(
            "mask has {} entries for {} pixels",
            mask.len(),
            gt.pixels().len()
        )));
    }
    let mut sse = 0.0;
    let mut n = 0;
    for ((a, b), &m) in gt.pixels().iter().zip(pred.pixels()).zip(mask) {
        if m {
            n += 1;
            for k in 0..3 {
                let d = a[k] as f64 - b[k] as f64;
                sse += d * d;
            }
        }
    }
    Ok((sse, n))
}

/// `10 log10(1 / MSE)` over masked pixels of images in `[0, 1]`.
pub fn masked_psnr<F: Raster>(gt: &F, pred: &F, mask: &[bool]) -> Result<f64> {
    let (sse, n) = masked_sse(gt, pred, mask)?;
    if n == 0 {
        return Err(Error::invalid("mask selects no pixels"));
    }
    Ok(psnr_from_mse(sse / (3 * n) as f64))
}

/// Clip-level PSNR: errors pooled over all frames before the log.
pub fn masked_psnr_clip<F: Raster>(gt: &VideoClip<F>, pred: &VideoClip<F>, masks: &[Vec<bool>]) -> Result<f64> {
    if gt.len() != pred.len() || gt.len() != masks.len() {
        return Err(Error::invalid(format!(
            "clip lengths differ: {} / {} / {} masks",
            gt.len(),
            pred.len(),
            masks.len()
        )));
    }
    let mut sse = 0.0;
    let mut n = 0;
    for ((a, b), m) in gt.frames().iter().zip(pred.frames()).zip(masks) {
        let (s, c) = masked_sse(a, b, m)?;
        sse += s;
        n += c;
    }
    if n == 0 {
        return Err(Error::invalid("masks select no pixels"));
    }
    Ok(psnr_from_mse(sse / (3 * n) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::PerspectiveFrame;

    #[test]
    fn identical_frames_hit_cap() {
        let f = PerspectiveFrame::filled(8, 8, [0.3; 3]).unwrap();
        assert_eq!(masked_psnr(&f, &f, &[true; 64]).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn empty_mask_rejected() {
        let f = PerspectiveFrame::filled(8, 8, [0.3; 3]).unwrap();
        assert!(masked_psnr(&f, &f, &[false; 64]).is_err());
        assert!(masked_psnr(&f, &f, &[true; 10]).is_err());
    }

    #[test]
    fn monotone_in_noise_amplitude() {
        let gt = PerspectiveFrame::filled(16, 16, [0.5; 3]).unwrap();
        let mut last = f64::INFINITY;
        for amp in [0.01f32, 0.05, 0.2] {
            let pred = PerspectiveFrame::from_fn(16, 16, |x, y| {
                let s = if (x + y) % 2 == 0 { amp } else { -amp };
                [0.5 + s; 3]
            })
            .unwrap();
            let p = masked_psnr(&gt, &pred, &[true; 256]).unwrap();
            assert!(p < last);
            last = p;
        }
    }
}
