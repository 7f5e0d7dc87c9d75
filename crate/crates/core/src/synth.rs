//! Procedural test content: seam-periodic noise panoramas, great-circle
//! scenes and line drawings.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::formats::{self, CorpusEntry, CorpusManifest, Document};
use crate::geometry::{equirect_to_dir, Direction3, EquirectCoord};
use crate::metrics::lines::HomogeneousLine;
use crate::raster::{circular_shift, luminance, EquirectFrame, PerspectiveFrame, Raster, Rgb, VideoClip};

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Value noise on a `cells_x x cells_y` lattice that wraps horizontally.
struct Lattice {
    cells_x: usize,
    cells_y: usize,
    values: Vec<[f64; 3]>,
}

impl Lattice {
    fn new(cells_x: usize, cells_y: usize, rng: &mut ChaCha20Rng) -> Self {
        let values = (0..cells_x * (cells_y + 1))
            .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        Self {
            cells_x,
            cells_y,
            values,
        }
    }

    /// `s, t` in `[0, 1]`; `s` is periodic.
    fn sample(&self, s: f64, t: f64) -> [f64; 3] {
        let x = s * self.cells_x as f64;
        let y = t * self.cells_y as f64;
        let (x0, y0) = (x.floor(), y.floor().min(self.cells_y as f64 - 1.0));
        let (fx, fy) = (smooth(x - x0), smooth((y - y0).min(1.0)));
        let xi = (x0 as i64).rem_euclid(self.cells_x as i64) as usize;
        let xj = (xi + 1) % self.cells_x;
        let yi = y0 as usize;
        let at = |i: usize, j: usize| self.values[j * self.cells_x + i];
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let top = at(xi, yi)[k] * (1.0 - fx) + at(xj, yi)[k] * fx;
            let bot = at(xi, yi + 1)[k] * (1.0 - fx) + at(xj, yi + 1)[k] * fx;
            *o = top * (1.0 - fy) + bot * fy;
        }
        out
    }
}

/// Three-octave colour value noise, continuous across the seam.
pub fn value_noise_panorama(height: usize, seed: u64, base_cells: usize) -> Result<EquirectFrame> {
    if base_cells < 2 {
        return Err(Error::invalid("base_cells must be at least 2"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let octaves: Vec<(Lattice, f64)> = (0..3)
        .map(|o| {
            let c = base_cells << o;
            (Lattice::new(2 * c, c, &mut rng), 0.5f64.powi(o))
        })
        .collect();
    let norm: f64 = octaves.iter().map(|o| o.1).sum();
    let (w, h) = ((2 * height) as f64, height as f64);
    EquirectFrame::from_fn(height, |x, y| {
        let (s, t) = (x as f64 / w, y as f64 / h);
        let mut acc = [0.0; 3];
        for (lat, amp) in &octaves {
            let v = lat.sample(s, t);
            for k in 0..3 {
                acc[k] += amp * v[k];
            }
        }
        acc.map(|a| (a / norm).clamp(0.0, 1.0) as f32)
    })
}

/// Independent uniform noise per pixel and channel.
pub fn white_noise_panorama(height: usize, seed: u64) -> Result<EquirectFrame> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rgb: Vec<Rgb> = (0..2 * height * height)
        .map(|_| [rng.random::<f32>(), rng.random::<f32>(), rng.random::<f32>()])
        .collect();
    EquirectFrame::opaque(2 * height, height, rgb)
}

/// Sphere split by great circles with the given plane normals; a
/// direction is `light` when it lies on the positive side of an odd number
/// of them. Every boundary images to a straight line in any pinhole view.
pub fn great_circle_panorama(height: usize, normals: &[Direction3], dark: Rgb, light: Rgb) -> Result<EquirectFrame> {
    let normals = normals
        .iter()
        .map(Direction3::normalized)
        .collect::<Result<Vec<_>>>()?;
    let (w, h) = (2 * height, height);
    EquirectFrame::from_fn(height, |x, y| {
        let d = equirect_to_dir(EquirectCoord { u: x as f64, v: y as f64 }, w, h)
            .expect("pixel centres are in range");
        let odd = normals.iter().filter(|n| n.dot(&d) > 0.0).count() % 2 == 1;
        if odd {
            light
        } else {
            dark
        }
    })
}

/// Antialiased infinite lines of `thickness` pixels drawn over a flat
/// background.
pub fn render_lines(
    width: usize,
    height: usize,
    lines: &[HomogeneousLine],
    thickness: f64,
    background: Rgb,
    ink: Rgb,
) -> Result<PerspectiveFrame> {
    PerspectiveFrame::from_fn(width, height, |x, y| {
        let cover = lines
            .iter()
            .map(|l| (thickness / 2.0 + 0.5 - l.distance(x as f64, y as f64).abs()).clamp(0.0, 1.0))
            .fold(0.0, f64::max) as f32;
        [0, 1, 2].map(|k| background[k] + cover * (ink[k] - background[k]))
    })
}

/// One source video of the adversarial curation corpus.
#[derive(Debug, Clone)]
pub struct CorpusVideo {
    pub id: String,
    /// Filter expected to reject the video, `None` for the clean one.
    pub violates: Option<&'static str>,
    pub likes: Option<u64>,
    pub clip: VideoClip<EquirectFrame>,
}

pub const CORPUS_HEIGHT: usize = 128;
pub const CORPUS_FRAMES: usize = 20;
pub const CORPUS_FPS: f64 = 1.0;
pub const CORPUS_LIKES: u64 = 120;
/// Horizontal pan of every moving video, pixels per frame.
pub const CORPUS_PAN: i64 = 3;

fn map_pixels(f: &EquirectFrame, g: impl Fn(usize, usize, Rgb) -> Rgb) -> EquirectFrame {
    let w = f.width();
    EquirectFrame::from_fn(f.height(), |x, y| g(x, y, f.pixels()[y * w + x])).expect("same size")
}

fn panning(base: &EquirectFrame, frames: usize) -> Vec<EquirectFrame> {
    (0..frames).map(|k| circular_shift(base, CORPUS_PAN * k as i64)).collect()
}

/// Two panoramas squeezed into the top and bottom halves, one darkened and
/// one brightened, as in over-under stereo uploads.
fn stacked(a: &EquirectFrame, b: &EquirectFrame) -> EquirectFrame {
    let h = a.height();
    map_pixels(a, |x, y, _| {
        let (src, sy, off) = if y < h / 2 { (a, 2 * y, -0.25) } else { (b, 2 * (y - h / 2), 0.25) };
        let p = src.pixel(x, sy);
        let q = src.pixel(x, sy + 1);
        [0, 1, 2].map(|k| ((p[k] + q[k]) / 2.0 + off).clamp(0.0, 1.0))
    })
}

/// Right half replaced by the mirror image of the left half.
fn mirrored(f: &EquirectFrame) -> EquirectFrame {
    let w = f.width();
    map_pixels(f, |x, y, p| if x < w / 2 { p } else { f.pixel(w - 1 - x, y) })
}

/// Luma-tinted copy with a fixed colour cast.
fn tinted(f: &EquirectFrame, tint: Rgb) -> EquirectFrame {
    map_pixels(f, |_, _, p| {
        let l = luminance(p);
        let v = 0.5 + (l - 0.5) * 1.6;
        tint.map(|t| (t * 2.0 * v).clamp(0.0, 1.0))
    })
}

/// Everything below the `fraction` luma quantile goes black; the rest is
/// rescaled so it stays continuous at the threshold.
fn darkened(f: &EquirectFrame, fraction: f64) -> EquirectFrame {
    let mut l: Vec<f32> = f.pixels().iter().map(|p| luminance(*p)).collect();
    l.sort_by(f32::total_cmp);
    let t = l[((l.len() as f64 * fraction) as usize).min(l.len() - 1)];
    map_pixels(f, |_, _, p| {
        let lum = luminance(p);
        if lum <= t {
            [0.0; 3]
        } else {
            let s = (lum - t) / (1.0 - t) / lum;
            p.map(|c| (c * s).clamp(0.0, 1.0))
        }
    })
}

/// Six videos for the curation cascade: one clean panning panorama and
/// five that each break exactly one filter (format, half similarity,
/// static, cut, blackness). Every video pans by [`CORPUS_PAN`] px/frame
/// except the static one.
pub fn adversarial_corpus() -> Result<Vec<CorpusVideo>> {
    let n = CORPUS_FRAMES;
    let scene = |seed| value_noise_panorama(CORPUS_HEIGHT, seed, 4);
    let (a, b) = (scene(11)?, scene(12)?);
    let clip = |frames: Vec<EquirectFrame>| VideoClip::new(frames, CORPUS_FPS);
    let video = |id: &str, violates, frames| -> Result<CorpusVideo> {
        Ok(CorpusVideo {
            id: id.to_string(),
            violates,
            likes: Some(CORPUS_LIKES),
            clip: clip(frames)?,
        })
    };

    let cool = tinted(&a, [0.25, 0.45, 0.7]);
    let warm = tinted(&b, [0.75, 0.5, 0.2]);
    let cut_frames: Vec<EquirectFrame> = (0..n)
        .map(|k| {
            let src = if (5..15).contains(&k) { &warm } else { &cool };
            circular_shift(src, CORPUS_PAN * k as i64)
        })
        .collect();

    Ok(vec![
        video("clean", None, panning(&a, n))?,
        video(
            "stacked",
            Some("format"),
            panning(&a, n).iter().zip(panning(&b, n)).map(|(x, y)| stacked(x, &y)).collect(),
        )?,
        video("mirrored", Some("half_similarity"), panning(&a, n).iter().map(mirrored).collect())?,
        video("static", Some("static"), vec![a.clone(); n])?,
        video("cut", Some("cut"), cut_frames)?,
        video("dark", Some("blackness"), panning(&darkened(&a, 0.6), n))?,
    ])
}

pub const CORPUS_MANIFEST: &str = "corpus.json";

/// Writes every video as a frame directory plus `corpus.json`.
pub fn write_corpus(dir: &Path, videos: &[CorpusVideo]) -> Result<CorpusManifest> {
    let mut entries = Vec::new();
    for v in videos {
        formats::write_equirect_clip(&dir.join(&v.id), &v.clip, None, None)?;
        entries.push(CorpusEntry {
            id: v.id.clone(),
            path: v.id.clone(),
            fps: v.clip.fps(),
            likes: v.likes,
        });
    }
    let manifest = CorpusManifest {
        version: formats::SCHEMA_VERSION,
        videos: entries,
    };
    manifest.write(&dir.join(CORPUS_MANIFEST))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;

    #[test]
    fn value_noise_is_seam_continuous_and_deterministic() {
        let a = value_noise_panorama(64, 3, 4).unwrap();
        assert_eq!(a, value_noise_panorama(64, 3, 4).unwrap());
        assert_ne!(a, value_noise_panorama(64, 4, 4).unwrap());
        let w = a.width();
        for y in 0..64 {
            let (l, r) = (a.pixel(0, y), a.pixel(w - 1, y));
            let inner = a.pixel(1, y);
            for k in 0..3 {
                // the seam step is no larger than a typical interior step
                assert!((l[k] - r[k]).abs() < 0.08 && (l[k] - inner[k]).abs() < 0.08);
            }
        }
    }

    #[test]
    fn great_circle_halves() {
        let p = great_circle_panorama(32, &[Direction3::new(0.0, 0.0, 1.0)], [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(p.pixel(5, 3), [1.0; 3]);
        assert_eq!(p.pixel(5, 28), [0.0; 3]);
    }

    #[test]
    fn rendered_line_is_centred() {
        let l = HomogeneousLine::new(1.0, 0.0, -10.0).unwrap();
        let f = render_lines(24, 16, &[l], 3.0, [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(f.pixel(10, 4), [1.0; 3]);
        assert_eq!(f.pixel(11, 4), [1.0; 3]);
        assert_eq!(f.pixel(13, 4), [0.0; 3]);
    }
}
