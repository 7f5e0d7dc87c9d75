//! Per-clip filters: block-matching motion, histogram cuts, blackness and
//! spatial variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{luminance, LumaImage, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionParams {
    pub levels: usize,
    pub block: usize,
    /// Search radius per pyramid level, pixels at that level.
    pub search: usize,
    /// Minimum ZNCC of an accepted match.
    pub min_confidence: f64,
    /// Blocks with a luma standard deviation below this are ignored.
    pub min_texture: f64,
    /// Fraction of textured blocks that must match reliably.
    pub min_reliable_fraction: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        Self {
            levels: 3,
            block: 16,
            search: 8,
            min_confidence: 0.8,
            min_texture: 0.02,
            min_reliable_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionReport {
    /// Mean displacement magnitude of reliable blocks, pixels per frame.
    pub mean_magnitude: f64,
    /// Reliable blocks over textured blocks, across all frame pairs.
    pub reliable_fraction: f64,
    pub reliable: bool,
}

/// Horizontal wrap, vertical clamp.
#[inline]
fn at(img: &LumaImage, x: i64, y: i64) -> f32 {
    let xi = x.rem_euclid(img.width as i64) as usize;
    let yi = y.clamp(0, img.height as i64 - 1) as usize;
    img.data[yi * img.width + xi]
}

fn half(img: &LumaImage) -> LumaImage {
    img.downsample(2)
}

fn block_std(img: &LumaImage, x0: i64, y0: i64, n: i64) -> f64 {
    let mut sum = 0.0;
    let mut sq = 0.0;
    for y in y0..y0 + n {
        for x in x0..x0 + n {
            let v = at(img, x, y) as f64;
            sum += v;
            sq += v * v;
        }
    }
    let c = (n * n) as f64;
    let m = sum / c;
    (sq / c - m * m).max(0.0).sqrt()
}

fn zncc(a: &LumaImage, b: &LumaImage, x0: i64, y0: i64, dx: i64, dy: i64, n: i64) -> f64 {
    let c = (n * n) as f64;
    let (mut sa, mut sb) = (0.0, 0.0);
    for y in y0..y0 + n {
        for x in x0..x0 + n {
            sa += at(a, x, y) as f64;
            sb += at(b, x + dx, y + dy) as f64;
        }
    }
    let (ma, mb) = (sa / c, sb / c);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for y in y0..y0 + n {
        for x in x0..x0 + n {
            let p = at(a, x, y) as f64 - ma;
            let q = at(b, x + dx, y + dy) as f64 - mb;
            cov += p * q;
            va += p * p;
            vb += q * q;
        }
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// Copies the `w x h` window at `(x0, y0)` with wrap/clamp addressing.
fn window(img: &LumaImage, x0: i64, y0: i64, w: usize, h: usize, out: &mut Vec<f32>) {
    out.clear();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            out.push(at(img, x0 + x, y0 + y));
        }
    }
}

/// Best integer displacement within `radius` of `guess` by SAD; ties go
/// to the candidate closest to the guess, then to raster order.
fn search(a: &LumaImage, b: &LumaImage, x0: i64, y0: i64, n: i64, guess: (i64, i64), radius: i64) -> (i64, i64) {
    let nu = n as usize;
    let span = nu + 2 * radius as usize;
    let (mut blk, mut area) = (Vec::with_capacity(nu * nu), Vec::with_capacity(span * span));
    window(a, x0, y0, nu, nu, &mut blk);
    window(b, x0 + guess.0 - radius, y0 + guess.1 - radius, span, span, &mut area);
    let mut best = (f32::INFINITY, i64::MAX, guess);
    for oy in 0..=2 * radius as usize {
        for ox in 0..=2 * radius as usize {
            let mut cost = 0.0f32;
            for (row, src) in blk.chunks_exact(nu).enumerate() {
                let start = (oy + row) * span + ox;
                cost += src.iter().zip(&area[start..start + nu]).map(|(p, q)| (p - q).abs()).sum::<f32>();
                if cost > best.0 {
                    break;
                }
            }
            let (dx, dy) = (ox as i64 - radius, oy as i64 - radius);
            let dist = dx * dx + dy * dy;
            if cost < best.0 || (cost == best.0 && dist < best.1) {
                best = (cost, dist, (guess.0 + dx, guess.1 + dy));
            }
        }
    }
    best.2
}

/// Coarse-to-fine block displacements from `a` to `b` on a grid of
/// `block`-sized blocks at full resolution. Returns `(dx, dy, confidence,
/// textured)` per block.
pub fn block_flow(a: &LumaImage, b: &LumaImage, p: &MotionParams) -> Vec<(i64, i64, f64, bool)> {
    let mut pyr_a = vec![a.clone()];
    let mut pyr_b = vec![b.clone()];
    for _ in 1..p.levels.max(1) {
        let (na, nb) = (half(pyr_a.last().unwrap()), half(pyr_b.last().unwrap()));
        if na.width < p.block || na.height < p.block {
            break;
        }
        pyr_a.push(na);
        pyr_b.push(nb);
    }
    let n = p.block as i64;
    let r = p.search as i64;
    let mut out = Vec::new();
    for by in 0..a.height / p.block {
        for bx in 0..a.width / p.block {
            let (cx, cy) = ((bx * p.block + p.block / 2) as i64, (by * p.block + p.block / 2) as i64);
            let mut d = (0i64, 0i64);
            for level in (0..pyr_a.len()).rev() {
                let s = 1i64 << level;
                let guess = if level + 1 < pyr_a.len() { (d.0 * 2, d.1 * 2) } else { (0, 0) };
                let (lx, ly) = (cx / s - n / 2, cy / s - n / 2);
                d = search(&pyr_a[level], &pyr_b[level], lx, ly, n, guess, r);
            }
            let (x0, y0) = (cx - n / 2, cy - n / 2);
            let textured = block_std(a, x0, y0, n) >= p.min_texture;
            let conf = if textured { zncc(a, b, x0, y0, d.0, d.1, n) } else { 0.0 };
            out.push((d.0, d.1, conf, textured));
        }
    }
    out
}

/// Mean motion over consecutive frame pairs, gated by match confidence.
pub fn motion_score(frames: &[LumaImage], p: &MotionParams) -> Result<MotionReport> {
    if frames.len() < 2 {
        return Err(Error::invalid("motion needs at least 2 frames"));
    }
    let (mut sum, mut reliable, mut textured) = (0.0, 0usize, 0usize);
    for pair in frames.windows(2) {
        for (dx, dy, conf, tex) in block_flow(&pair[0], &pair[1], p) {
            if !tex {
                continue;
            }
            textured += 1;
            if conf >= p.min_confidence {
                reliable += 1;
                sum += ((dx * dx + dy * dy) as f64).sqrt();
            }
        }
    }
    let fraction = if textured == 0 { 0.0 } else { reliable as f64 / textured as f64 };
    Ok(MotionReport {
        mean_magnitude: if reliable == 0 { 0.0 } else { sum / reliable as f64 },
        reliable_fraction: fraction,
        reliable: fraction >= p.min_reliable_fraction,
    })
}

pub const HISTOGRAM_BINS: usize = 32;

/// Normalized per-channel histograms.
pub fn histograms<F: Raster>(f: &F) -> [Vec<f64>; 3] {
    let mut h = [vec![0.0; HISTOGRAM_BINS], vec![0.0; HISTOGRAM_BINS], vec![0.0; HISTOGRAM_BINS]];
    let n = f.pixels().len() as f64;
    for p in f.pixels() {
        for k in 0..3 {
            let b = ((p[k] * HISTOGRAM_BINS as f32) as usize).min(HISTOGRAM_BINS - 1);
            h[k][b] += 1.0 / n;
        }
    }
    h
}

/// Mean over channels of `sum(min(a, b))`, 1 for identical histograms.
pub fn histogram_intersection(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]) -> f64 {
    (0..3)
        .map(|k| a[k].iter().zip(&b[k]).map(|(x, y)| x.min(*y)).sum::<f64>())
        .sum::<f64>()
        / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    /// Index `k` of every cut between frames `k - 1` and `k`.
    pub cuts: Vec<usize>,
    /// Lowest consecutive-frame intersection.
    pub min_intersection: f64,
}

/// Cuts are drops in consecutive histogram intersection below `threshold`
/// that are not explained by a single odd frame: the transition into `k`
/// is ignored when frame `k + 1` matches `k - 1` again, or when `k` matches
/// `k - 2` (the odd frame was `k - 1`).
pub fn cut_detect<F: Raster>(frames: &[F], threshold: f64) -> Result<CutReport> {
    if frames.len() < 2 {
        return Err(Error::invalid("cut detection needs at least 2 frames"));
    }
    let hists: Vec<_> = frames.iter().map(histograms).collect();
    let sim = |i: usize, j: usize| histogram_intersection(&hists[i], &hists[j]);
    let mut cuts = Vec::new();
    let mut min_intersection = f64::INFINITY;
    for k in 1..frames.len() {
        let s = sim(k - 1, k);
        min_intersection = min_intersection.min(s);
        if s >= threshold {
            continue;
        }
        let flash_here = k + 1 < frames.len() && sim(k - 1, k + 1) >= threshold;
        let flash_before = k >= 2 && sim(k - 2, k) >= threshold;
        if !flash_here && !flash_before {
            cuts.push(k);
        }
    }
    Ok(CutReport { cuts, min_intersection })
}

pub const BLACK_LUMA: f32 = 0.02;

/// Fraction of pixels darker than [`BLACK_LUMA`].
pub fn black_fraction<F: Raster>(f: &F) -> f64 {
    let n = f.pixels().len();
    f.pixels().iter().filter(|p| luminance(**p) < BLACK_LUMA).count() as f64 / n as f64
}

/// Population variance of the luma of one frame.
pub fn spatial_variance<F: Raster>(f: &F) -> f64 {
    let n = f.pixels().len() as f64;
    let (mut s, mut sq) = (0.0, 0.0);
    for p in f.pixels() {
        let v = luminance(*p) as f64;
        s += v;
        sq += v * v;
    }
    let m = s / n;
    (sq / n - m * m).max(0.0)
}
