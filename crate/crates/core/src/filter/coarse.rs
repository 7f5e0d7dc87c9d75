//! Per-video filters run on sparsely sampled, 4x-downsampled frames.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::hough::{sobel_edges, Accumulator};
use crate::raster::LumaImage;

pub const COARSE_DOWNSAMPLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormatParams {
    /// Half-height of the central band as a fraction of the frame height.
    pub center_band: f64,
    /// Width of each boundary band as a fraction of the frame width.
    pub boundary_band: f64,
    /// Sobel magnitude for an edge pixel.
    pub edge_threshold: f32,
    /// A line counts as structure when its votes cover this fraction of
    /// the frame extent.
    pub line_coverage: f64,
    /// Fraction of sampled frames that must show structure to reject.
    pub persistence: f64,
}

impl Default for FormatParams {
    fn default() -> Self {
        Self {
            center_band: 0.125,
            boundary_band: 0.2,
            edge_threshold: 0.1,
            line_coverage: 0.6,
            persistence: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatReport {
    pub is_equirect: bool,
    /// Best horizontal-line coverage in the central band, per frame.
    pub center_scores: Vec<f64>,
    /// Best vertical-line coverage in the boundary bands, per frame.
    pub boundary_scores: Vec<f64>,
    /// Fraction of frames with structure in either band.
    pub persistence: f64,
}

/// Angle tolerance around exact horizontal / vertical lines.
const AXIS_TOLERANCE: f64 = 2.0 * PI / 180.0;
/// Texture next to a border tilts the local gradient, so edge pixels vote
/// over a wider fan than the bins that are finally inspected.
const VOTE_TOLERANCE: f64 = 20.0 * PI / 180.0;
const ANGLE_BINS: usize = 180;

/// `(center, boundary)` coverage for one downsampled frame.
pub fn format_scores(img: &LumaImage, p: &FormatParams) -> (f64, f64) {
    let edges = sobel_edges(img, p.edge_threshold);
    if edges.is_empty() {
        return (0.0, 0.0);
    }
    let mut acc = Accumulator::new(img.width, img.height, ANGLE_BINS);
    let tol_bins = (AXIS_TOLERANCE / PI * ANGLE_BINS as f64).round() as usize;
    let near_vertical = |k: usize| k <= tol_bins || k >= ANGLE_BINS - tol_bins;
    let near_horizontal = |k: usize| k.abs_diff(ANGLE_BINS / 2) <= tol_bins;
    acc.vote(&edges, VOTE_TOLERANCE, |k| near_vertical(k) || near_horizontal(k));

    let (w, h) = (img.width as f64, img.height as f64);
    let (mut center, mut boundary) = (0u32, 0u32);
    for k in 0..ANGLE_BINS {
        let horizontal = near_horizontal(k);
        if !horizontal && !near_vertical(k) {
            continue;
        }
        for r in 0..acc.rho_bins {
            // thinning can put a border's edge on either side of the step
            let v = (r.saturating_sub(1)..(r + 2).min(acc.rho_bins)).map(|i| acc.get(k, i)).sum::<u32>();
            if v == 0 {
                continue;
            }
            // position of the line where it crosses the image centre
            let rho = r as f64 - acc.rho_offset;
            let (s, c) = acc.theta(k).sin_cos();
            if horizontal {
                let y = (rho - c * w / 2.0) / s;
                if (y - h / 2.0).abs() <= p.center_band * h {
                    center = center.max(v);
                }
            } else {
                let x = (rho - s * h / 2.0) / c;
                if x <= p.boundary_band * w || x >= (1.0 - p.boundary_band) * w {
                    boundary = boundary.max(v);
                }
            }
        }
    }
    (center as f64 / w, boundary as f64 / h)
}

/// Flags stacked, letterboxed or otherwise non-equirect content by
/// persistent straight lines across the centre or near the side borders.
pub fn format_check(frames: &[LumaImage], p: &FormatParams) -> Result<FormatReport> {
    if frames.len() < 3 {
        return Err(Error::invalid(format!("format check needs at least 3 frames, got {}", frames.len())));
    }
    let (center_scores, boundary_scores): (Vec<f64>, Vec<f64>) =
        frames.iter().map(|f| format_scores(f, p)).unzip();
    let structured = center_scores
        .iter()
        .zip(&boundary_scores)
        .filter(|(c, b)| **c >= p.line_coverage || **b >= p.line_coverage)
        .count();
    let persistence = structured as f64 / frames.len() as f64;
    Ok(FormatReport {
        is_equirect: persistence < p.persistence,
        center_scores,
        boundary_scores,
        persistence,
    })
}

pub const SIMILARITY_TILE: usize = 16;
/// Tiles whose luma standard deviation is below this count as flat.
const FLAT_STD: f64 = 1e-3;

fn tile_stats(img: &LumaImage, x0: usize, y0: usize, n: usize) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sq = 0.0;
    for y in y0..y0 + n {
        for x in x0..x0 + n {
            let v = img.get(x, y) as f64;
            sum += v;
            sq += v * v;
        }
    }
    let count = (n * n) as f64;
    let mean = sum / count;
    (mean, (sq / count - mean * mean).max(0.0).sqrt())
}

/// `1 - mean ZNCC` over aligned tiles; tiles flat in both images are
/// skipped, a flat tile against a textured one scores 0.
pub fn tile_zncc_distance(a: &LumaImage, b: &LumaImage, tile: usize) -> f64 {
    let (w, h) = (a.width.min(b.width), a.height.min(b.height));
    let (mut total, mut count) = (0.0, 0usize);
    for ty in 0..h / tile {
        for tx in 0..w / tile {
            let (x0, y0) = (tx * tile, ty * tile);
            let (ma, sa) = tile_stats(a, x0, y0, tile);
            let (mb, sb) = tile_stats(b, x0, y0, tile);
            let (flat_a, flat_b) = (sa < FLAT_STD, sb < FLAT_STD);
            if flat_a && flat_b {
                continue;
            }
            count += 1;
            if flat_a || flat_b {
                continue;
            }
            let mut cov = 0.0;
            for y in y0..y0 + tile {
                for x in x0..x0 + tile {
                    cov += (a.get(x, y) as f64 - ma) * (b.get(x, y) as f64 - mb);
                }
            }
            total += cov / (tile * tile) as f64 / (sa * sb);
        }
    }
    if count == 0 {
        0.0
    } else {
        1.0 - total / count as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSimilarity {
    pub lr_distance: f64,
    pub tb_distance: f64,
}

/// Structural distance between the left/right halves (direct or mirrored,
/// whichever is closer) and between the top/bottom halves of a
/// downsampled frame.
pub fn half_similarity(img: &LumaImage) -> Result<HalfSimilarity> {
    if !img.width.is_multiple_of(2) || !img.height.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "half similarity needs even dimensions, got {}x{}",
            img.width, img.height
        )));
    }
    let (hw, hh) = (img.width / 2, img.height / 2);
    let left = img.crop(0, 0, hw, img.height);
    let right = img.crop(hw, 0, hw, img.height);
    let lr = tile_zncc_distance(&left, &right, SIMILARITY_TILE)
        .min(tile_zncc_distance(&left, &right.mirrored_horizontally(), SIMILARITY_TILE));
    let top = img.crop(0, 0, img.width, hh);
    let bottom = img.crop(0, hh, img.width, hh);
    Ok(HalfSimilarity {
        lr_distance: lr,
        tb_distance: tile_zncc_distance(&top, &bottom, SIMILARITY_TILE),
    })
}

/// 64-bit FNV-1a, used to derive per-video sampling seeds.
pub fn stable_hash(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// `count` distinct sorted frame indices below `total`, seeded.
pub fn sample_indices(total: usize, count: usize, seed: u64) -> Vec<usize> {
    if count >= total {
        return (0..total).collect();
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut v = sample(&mut rng, total, count).into_vec();
    v.sort_unstable();
    v
}

/// Mean over pixels of the temporal variance across `frames`. With
/// `subtract_mean` each frame's mean is removed first, so global
/// brightness flicker does not count as change.
pub fn temporal_variance(frames: &[LumaImage], subtract_mean: bool) -> Result<f64> {
    if frames.len() < 2 {
        return Err(Error::invalid("static check needs at least 2 frames"));
    }
    let n = frames[0].data.len();
    if frames.iter().any(|f| f.data.len() != n || f.width != frames[0].width) {
        return Err(Error::invalid("frames differ in size"));
    }
    let offsets: Vec<f64> = frames
        .iter()
        .map(|f| {
            if subtract_mean {
                f.data.iter().map(|&v| v as f64).sum::<f64>() / n as f64
            } else {
                0.0
            }
        })
        .collect();
    let t = frames.len() as f64;
    let mut total = 0.0;
    for i in 0..n {
        let vals = frames.iter().zip(&offsets).map(|(f, o)| f.data[i] as f64 - o);
        let mean = vals.clone().sum::<f64>() / t;
        total += vals.map(|v| (v - mean) * (v - mean)).sum::<f64>() / t;
    }
    Ok(total / n as f64)
}
