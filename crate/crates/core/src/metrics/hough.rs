//! Standard `(theta, rho)` Hough transform over Sobel edges.
//!
//! Each edge pixel votes only for angles near its gradient direction, peaks
//! are non-maximum-suppressed in `(theta, rho)` space and refined by a
//! vote-weighted centroid, and the supporting pixels along each refined line
//! give the segment extent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::metrics::lines::LineSegment;
use crate::raster::{LumaImage, PerspectiveFrame, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoughParams {
    /// Minimum Sobel magnitude (unit step = 1.0) for an edge pixel.
    pub edge_threshold: f32,
    /// Number of angle bins over `[0, pi)`.
    pub angle_bins: usize,
    /// Minimum votes for an accumulator peak.
    pub accumulator_threshold: u32,
    /// Shortest segment reported, pixels.
    pub min_segment_length: f64,
    /// Edge pixels vote within this angle of their gradient direction (radians).
    pub orientation_tolerance: f64,
    /// Suppression radius in angle (radians).
    pub nms_angle: f64,
    /// Suppression radius in offset (pixels).
    pub nms_rho: f64,
    /// Largest hole bridged when collecting a segment, pixels.
    pub max_gap: f64,
    /// Support band half-width around a line, pixels.
    pub max_distance: f64,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            edge_threshold: 0.2,
            angle_bins: 360,
            accumulator_threshold: 40,
            min_segment_length: 24.0,
            orientation_tolerance: 8f64.to_radians(),
            nms_angle: 6f64.to_radians(),
            nms_rho: 8.0,
            max_gap: 8.0,
            max_distance: 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub x: f64,
    pub y: f64,
    /// Gradient direction folded into `[0, pi)`; this is the line normal.
    pub normal: f64,
    pub magnitude: f32,
}

/// Sobel edges above `threshold`, thinned to one pixel across by
/// non-maximum suppression along the gradient. The one-pixel border is
/// skipped.
pub fn sobel_edges(img: &LumaImage, threshold: f32) -> Vec<EdgePoint> {
    let (w, h) = (img.width, img.height);
    let mut out = Vec::new();
    if w < 3 || h < 3 {
        return out;
    }
    let mut grad = vec![(0.0f32, 0.0f32, 0.0f32); w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: isize, dy: isize| img.get((x as isize + dx) as usize, (y as isize + dy) as usize);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let (gx, gy) = (gx / 4.0, gy / 4.0);
            grad[y * w + x] = (gx, gy, gx.hypot(gy));
        }
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let (gx, gy, mag) = grad[y * w + x];
            if mag < threshold {
                continue;
            }
            let normal = (gy as f64).atan2(gx as f64).rem_euclid(PI);
            // neighbor offset along the gradient, quantized to 45 degrees
            let (dx, dy): (isize, isize) = match ((normal / (PI / 4.0)).round() as usize) % 4 {
                0 => (1, 0),
                1 => (1, 1),
                2 => (0, 1),
                _ => (-1, 1),
            };
            let at = |sx: isize, sy: isize| grad[(y as isize + sy) as usize * w + (x as isize + sx) as usize].2;
            // on ties only the pixel further along the gradient survives
            if mag >= at(-dx, -dy) && mag > at(dx, dy) {
                out.push(EdgePoint {
                    x: x as f64,
                    y: y as f64,
                    normal,
                    magnitude: mag,
                });
            }
        }
    }
    out
}

/// Vote array over `angle_bins x rho_bins`, `rho` in whole pixels.
#[derive(Debug, Clone)]
pub struct Accumulator {
    pub angle_bins: usize,
    pub rho_bins: usize,
    /// `rho = index - rho_offset`.
    pub rho_offset: f64,
    pub votes: Vec<u32>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Accumulator {
    pub fn new(width: usize, height: usize, angle_bins: usize) -> Self {
        let diag = (width as f64).hypot(height as f64).ceil();
        let rho_bins = 2 * diag as usize + 1;
        let (sin, cos) = (0..angle_bins)
            .map(|k| (k as f64 * PI / angle_bins as f64).sin_cos())
            .unzip();
        Self {
            angle_bins,
            rho_bins,
            rho_offset: diag,
            votes: vec![0; angle_bins * rho_bins],
            cos,
            sin,
        }
    }

    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * PI / self.angle_bins as f64
    }

    fn rho_index(&self, rho: f64) -> usize {
        ((rho + self.rho_offset).round().max(0.0) as usize).min(self.rho_bins - 1)
    }

    /// Adds votes from `edges` for angles within `tolerance` of each edge
    /// normal, restricted to bins for which `allow(theta_bin)` holds.
    pub fn vote(&mut self, edges: &[EdgePoint], tolerance: f64, allow: impl Fn(usize) -> bool) {
        let n = self.angle_bins as isize;
        let span = (tolerance / PI * self.angle_bins as f64).floor() as isize;
        for e in edges {
            let centre = (e.normal / PI * self.angle_bins as f64).round() as isize;
            for dk in -span..=span {
                let k = (centre + dk).rem_euclid(n) as usize;
                if !allow(k) {
                    continue;
                }
                let rho = e.x * self.cos[k] + e.y * self.sin[k];
                let r = self.rho_index(rho);
                self.votes[k * self.rho_bins + r] += 1;
            }
        }
    }

    pub fn get(&self, k: usize, r: usize) -> u32 {
        self.votes[k * self.rho_bins + r]
    }

    /// Max votes over the whole array.
    pub fn peak(&self) -> u32 {
        self.votes.iter().copied().max().unwrap_or(0)
    }
}

/// Distance between two `(theta, rho)` lines, accounting for the
/// `(theta + pi, -rho)` identity. Returns `(d_theta, d_rho)`.
fn line_distance(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let direct = ((a.0 - b.0).abs(), (a.1 - b.1).abs());
    let flipped = (PI - (a.0 - b.0).abs(), (a.1 + b.1).abs());
    if direct.0 <= flipped.0 {
        direct
    } else {
        flipped
    }
}

/// Detected infinite line before extent extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoughLine {
    pub theta: f64,
    pub rho: f64,
    pub votes: u32,
}

/// Peaks above `threshold`, strongest first, suppressed within the NMS
/// radii and refined to a vote-weighted centroid.
pub fn find_peaks(acc: &Accumulator, threshold: u32, nms_angle: f64, nms_rho: f64) -> Vec<HoughLine> {
    let mut cand: Vec<(u32, usize)> = acc
        .votes
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= threshold.max(1))
        .map(|(i, &v)| (v, i))
        .collect();
    cand.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut accepted: Vec<HoughLine> = Vec::new();
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    for (votes, idx) in cand {
        let (k, r) = (idx / acc.rho_bins, idx % acc.rho_bins);
        let here = (acc.theta(k), r as f64 - acc.rho_offset);
        if seeds.iter().any(|&s| {
            let (dt, dr) = line_distance(s, here);
            dt <= nms_angle && dr <= nms_rho
        }) {
            continue;
        }
        seeds.push(here);
        let (theta, rho) = refine(acc, k, r, votes, nms_angle, nms_rho);
        accepted.push(HoughLine { theta, rho, votes });
    }
    accepted
}

fn refine(acc: &Accumulator, k0: usize, r0: usize, peak: u32, nms_angle: f64, nms_rho: f64) -> (f64, f64) {
    let span_k = (nms_angle / PI * acc.angle_bins as f64).floor() as isize;
    let span_r = nms_rho.floor() as isize;
    let theta0 = acc.theta(k0);
    let rho0 = r0 as f64 - acc.rho_offset;
    let cut = peak as f64 * 0.5;
    let (mut sw, mut st, mut sr) = (0.0, 0.0, 0.0);
    for dk in -span_k..=span_k {
        let raw = k0 as isize + dk;
        let (k, flip) = if raw < 0 {
            ((raw + acc.angle_bins as isize) as usize, true)
        } else if raw >= acc.angle_bins as isize {
            ((raw - acc.angle_bins as isize) as usize, true)
        } else {
            (raw as usize, false)
        };
        let theta = theta0 + dk as f64 * PI / acc.angle_bins as f64;
        for dr in -span_r..=span_r {
            let rho = rho0 + dr as f64;
            let stored = if flip { -rho } else { rho };
            let ri = (stored + acc.rho_offset).round();
            if ri < 0.0 || ri >= acc.rho_bins as f64 {
                continue;
            }
            let v = acc.get(k, ri as usize) as f64;
            if v >= cut {
                sw += v;
                st += v * theta;
                sr += v * rho;
            }
        }
    }
    let (mut theta, mut rho) = (st / sw, sr / sw);
    if theta < 0.0 {
        theta += PI;
        rho = -rho;
    } else if theta >= PI {
        theta -= PI;
        rho = -rho;
    }
    (theta, rho)
}

/// Longest run of supporting edge pixels along `line`.
pub fn extract_segment(line: &HoughLine, edges: &[EdgePoint], params: &HoughParams) -> Option<LineSegment> {
    let (s, c) = line.theta.sin_cos();
    let mut along: Vec<f64> = edges
        .iter()
        .filter(|e| {
            let (dt, _) = line_distance((e.normal, 0.0), (line.theta, 0.0));
            dt <= params.orientation_tolerance
                && (e.x * c + e.y * s - line.rho).abs() <= params.max_distance
        })
        .map(|e| -e.x * s + e.y * c)
        .collect();
    if along.len() < 2 {
        return None;
    }
    along.sort_by(f64::total_cmp);
    let (mut best, mut start) = ((along[0], along[0]), along[0]);
    for pair in along.windows(2) {
        if pair[1] - pair[0] > params.max_gap {
            start = pair[1];
        }
        if pair[1] - start > best.1 - best.0 {
            best = (start, pair[1]);
        }
    }
    if best.1 - best.0 < params.min_segment_length {
        return None;
    }
    let point = |t: f64| (line.rho * c - t * s, line.rho * s + t * c);
    let (p, q) = (point(best.0), point(best.1));
    LineSegment::new(p.0, p.1, q.0, q.1).ok()
}

/// Line segments in a frame, strongest first.
pub fn hough_detect(frame: &PerspectiveFrame, params: &HoughParams) -> Vec<LineSegment> {
    detect_in_luma(&frame.to_luma(), params)
}

pub fn detect_in_luma(img: &LumaImage, params: &HoughParams) -> Vec<LineSegment> {
    let edges = sobel_edges(img, params.edge_threshold);
    if edges.is_empty() {
        return Vec::new();
    }
    let mut acc = Accumulator::new(img.width, img.height, params.angle_bins);
    acc.vote(&edges, params.orientation_tolerance, |_| true);
    find_peaks(&acc, params.accumulator_threshold, params.nms_angle, params.nms_rho)
        .iter()
        .filter_map(|l| extract_segment(l, &edges, params))
        .collect()
}
