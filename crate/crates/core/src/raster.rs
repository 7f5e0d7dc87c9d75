//! Frame buffers and pixel sampling.
//!
//! Colour is stored as linear `f32` triples in `[0, 1]`; 8-bit quantization
//! only happens in [`crate::formats`]. Texel centres sit on integer
//! coordinates, so sampling at `(i, j)` returns the stored pixel exactly.

use crate::error::{Error, Result};
use crate::geometry::EquirectCoord;

pub type Rgb = [f32; 3];

pub const BLACK: Rgb = [0.0, 0.0, 0.0];

/// Luma weights used for every grayscale conversion in the crate.
#[inline]
pub fn luminance(c: Rgb) -> f32 {
    0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]
}

fn check_pixels(pixels: &[Rgb], width: usize, height: usize) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::invalid(format!(
            "pixel buffer holds {} values, expected {width}x{height}",
            pixels.len()
        )));
    }
    if let Some(i) = pixels
        .iter()
        .position(|p| p.iter().any(|v| !(0.0..=1.0).contains(v)))
    {
        return Err(Error::invalid(format!(
            "pixel {i} has a channel outside [0, 1]: {:?}",
            pixels[i]
        )));
    }
    Ok(())
}

/// Anything with a width, height and row-major colour buffer.
pub trait Raster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn pixels(&self) -> &[Rgb];

    fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels()[y * self.width() + x]
    }

    fn to_luma(&self) -> LumaImage {
        LumaImage {
            width: self.width(),
            height: self.height(),
            data: self.pixels().iter().map(|&p| luminance(p)).collect(),
        }
    }
}

/// A pinhole camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveFrame {
    width: usize,
    height: usize,
    rgb: Vec<Rgb>,
}

pub const MIN_PERSPECTIVE_SIDE: usize = 8;

impl PerspectiveFrame {
    pub fn new(width: usize, height: usize, rgb: Vec<Rgb>) -> Result<Self> {
        if width < MIN_PERSPECTIVE_SIDE || height < MIN_PERSPECTIVE_SIDE {
            return Err(Error::invalid(format!(
                "perspective frames must be at least {MIN_PERSPECTIVE_SIDE}x{MIN_PERSPECTIVE_SIDE}, got {width}x{height}"
            )));
        }
        check_pixels(&rgb, width, height)?;
        Ok(Self { width, height, rgb })
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> Rgb) -> Result<Self> {
        let rgb = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, rgb)
    }

    pub fn into_pixels(self) -> Vec<Rgb> {
        self.rgb
    }

    /// Bilinear sample with clamp-to-edge addressing.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Rgb {
        let xmax = (self.width - 1) as f64;
        let ymax = (self.height - 1) as f64;
        let x = x.clamp(0.0, xmax);
        let y = y.clamp(0.0, ymax);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = (x - x0 as f64) as f32;
        let fy = (y - y0 as f64) as f32;
        let w = self.width;
        bilerp(
            self.rgb[y0 * w + x0],
            self.rgb[y0 * w + x1],
            self.rgb[y1 * w + x0],
            self.rgb[y1 * w + x1],
            fx,
            fy,
        )
    }
}

impl Raster for PerspectiveFrame {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn pixels(&self) -> &[Rgb] {
        &self.rgb
    }
}

/// A 2:1 equirectangular frame with a per-pixel observation mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EquirectFrame {
    width: usize,
    height: usize,
    rgb: Vec<Rgb>,
    mask: Vec<bool>,
}

impl EquirectFrame {
    pub fn new(width: usize, height: usize, rgb: Vec<Rgb>, mask: Vec<bool>) -> Result<Self> {
        if height == 0 || width != 2 * height {
            return Err(Error::invalid(format!(
                "equirectangular frames must be 2:1, got {width}x{height}"
            )));
        }
        check_pixels(&rgb, width, height)?;
        if mask.len() != rgb.len() {
            return Err(Error::invalid(format!(
                "mask holds {} values, expected {}",
                mask.len(),
                rgb.len()
            )));
        }
        Ok(Self {
            width,
            height,
            rgb,
            mask,
        })
    }

    /// A fully observed frame.
    pub fn opaque(width: usize, height: usize, rgb: Vec<Rgb>) -> Result<Self> {
        let n = rgb.len();
        Self::new(width, height, rgb, vec![true; n])
    }

    pub fn filled(height: usize, color: Rgb) -> Result<Self> {
        let width = 2 * height;
        Self::opaque(width, height, vec![color; width * height])
    }

    pub fn from_fn(height: usize, f: impl Fn(usize, usize) -> Rgb) -> Result<Self> {
        let width = 2 * height;
        let rgb = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::opaque(width, height, rgb)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mask_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn into_parts(self) -> (Vec<Rgb>, Vec<bool>) {
        (self.rgb, self.mask)
    }

    /// Mean column of the observed pixels, computed on the circle so a
    /// region straddling the seam is handled. `None` for an empty mask.
    pub fn mask_centroid_column(&self) -> Option<f64> {
        let (mut sx, mut sy, mut n) = (0.0f64, 0.0f64, 0usize);
        let w = self.width as f64;
        for (i, &m) in self.mask.iter().enumerate() {
            if m {
                let a = (i % self.width) as f64 / w * std::f64::consts::TAU;
                sx += a.cos();
                sy += a.sin();
                n += 1;
            }
        }
        if n == 0 {
            return None;
        }
        let a = sy.atan2(sx).rem_euclid(std::f64::consts::TAU);
        Some(a / std::f64::consts::TAU * w)
    }
}

impl Raster for EquirectFrame {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn pixels(&self) -> &[Rgb] {
        &self.rgb
    }
}

#[inline]
fn bilerp(a: Rgb, b: Rgb, c: Rgb, d: Rgb, fx: f32, fy: f32) -> Rgb {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let top = a[k] + (b[k] - a[k]) * fx;
        let bot = c[k] + (d[k] - c[k]) * fx;
        out[k] = top + (bot - top) * fy;
    }
    out
}

/// Bilinear sample that wraps horizontally across the seam and clamps rows
/// at the poles.
pub fn sample_bilinear_wrapped(f: &EquirectFrame, c: EquirectCoord) -> Rgb {
    let w = f.width;
    let h = f.height;
    let u = c.u.rem_euclid(w as f64);
    let v = c.v.clamp(0.0, (h - 1) as f64);
    let x0f = u.floor();
    let y0f = v.floor();
    let fx = (u - x0f) as f32;
    let fy = (v - y0f) as f32;
    let x0 = (x0f as usize).min(w - 1);
    let x1 = (x0 + 1) % w;
    let y0 = y0f as usize;
    let y1 = (y0 + 1).min(h - 1);
    bilerp(
        f.rgb[y0 * w + x0],
        f.rgb[y0 * w + x1],
        f.rgb[y1 * w + x0],
        f.rgb[y1 * w + x1],
        fx,
        fy,
    )
}

/// Rotates columns right by `offset` (mod width); the mask moves with them.
pub fn circular_shift(f: &EquirectFrame, offset: i64) -> EquirectFrame {
    let w = f.width;
    let k = offset.rem_euclid(w as i64) as usize;
    let mut rgb = Vec::with_capacity(f.rgb.len());
    let mut mask = Vec::with_capacity(f.mask.len());
    for row in 0..f.height {
        let base = row * w;
        let src = base + (w - k) % w;
        // out[j] = in[(j - k) mod w]
        rgb.extend_from_slice(&f.rgb[src..base + w]);
        rgb.extend_from_slice(&f.rgb[base..src]);
        mask.extend_from_slice(&f.mask[src..base + w]);
        mask.extend_from_slice(&f.mask[base..src]);
    }
    EquirectFrame {
        width: w,
        height: f.height,
        rgb,
        mask,
    }
}

/// Half-turn about the vertical axis.
pub fn rotate_180(f: &EquirectFrame) -> Result<EquirectFrame> {
    if !f.width.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "rotate_180 needs an even width, got {}",
            f.width
        )));
    }
    Ok(circular_shift(f, (f.width / 2) as i64))
}

/// Ordered frames sharing one size.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip<F> {
    frames: Vec<F>,
    fps: f64,
}

impl<F: Raster> VideoClip<F> {
    pub fn new(frames: Vec<F>, fps: f64) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::invalid("a clip needs at least one frame"));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::invalid(format!("fps must be positive, got {fps}")));
        }
        let (w, h) = (frames[0].width(), frames[0].height());
        if let Some(i) = frames
            .iter()
            .position(|f| f.width() != w || f.height() != h)
        {
            return Err(Error::invalid(format!(
                "frame {i} is {}x{}, clip is {w}x{h}",
                frames[i].width(),
                frames[i].height()
            )));
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[F] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<F> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }
}

/// Single-channel float image used by edge, flow and filter code.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl LumaImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid("luma buffer size does not match dimensions"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Box-filter downsampling by an integer factor; trailing pixels that
    /// do not fill a whole box are dropped.
    pub fn downsample(&self, factor: usize) -> LumaImage {
        let factor = factor.max(1);
        if factor == 1 {
            return self.clone();
        }
        let w = (self.width / factor).max(1);
        let h = (self.height / factor).max(1);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0f32;
                let mut n = 0usize;
                for yy in y * factor..((y + 1) * factor).min(self.height) {
                    for xx in x * factor..((x + 1) * factor).min(self.width) {
                        s += self.get(xx, yy);
                        n += 1;
                    }
                }
                data.push(s / n as f32);
            }
        }
        LumaImage {
            width: w,
            height: h,
            data,
        }
    }

    /// Copy of the `[x0, x0+w) x [y0, y0+h)` window.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> LumaImage {
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        LumaImage {
            width: w,
            height: h,
            data,
        }
    }

    pub fn mirrored_horizontally(&self) -> LumaImage {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            let row = &self.data[y * self.width..(y + 1) * self.width];
            data.extend(row.iter().rev());
        }
        LumaImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}
