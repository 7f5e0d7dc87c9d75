//! Dataset curation cascade.
//!
//! Per video: like count, format (straight structure in the centre or at
//! the borders), half similarity (duplicated or stacked halves) and a
//! static check, on sparsely sampled 4x-downsampled frames. The video is
//! then split into fixed-length clips and each clip gets motion, cut,
//! blackness and spatial variance verdicts. Every enabled filter is
//! evaluated for every clip; a rejected clip names the first failing
//! filter in [`FILTER_ORDER`].

pub mod coarse;
pub mod fine;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{self, CorpusEntry, CorpusManifest, Document};
use crate::par;
use crate::raster::{EquirectFrame, LumaImage, Raster, VideoClip};

pub use coarse::{format_check, half_similarity, temporal_variance, FormatParams, FormatReport, HalfSimilarity};
pub use fine::{black_fraction, cut_detect, motion_score, spatial_variance, CutReport, MotionReport};

pub const FILTER_ORDER: [&str; 9] = [
    "likes",
    "format",
    "half_similarity",
    "static",
    "motion",
    "cut",
    "blackness",
    "variance",
    "text",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LikesConfig {
    pub enabled: bool,
    /// Videos need strictly more likes than this.
    pub min_exclusive: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormatConfig {
    pub enabled: bool,
    pub params: FormatParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSimilarityConfig {
    pub enabled: bool,
    /// Reject when either distance falls below this.
    pub reject_below: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticConfig {
    pub enabled: bool,
    pub reject_below: f64,
    pub samples: usize,
    pub subtract_mean: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionConfig {
    pub enabled: bool,
    /// Pixels per frame.
    pub reject_below: f64,
    pub params: fine::MotionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutConfig {
    pub enabled: bool,
    /// Histogram intersection below which consecutive frames differ.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlacknessConfig {
    pub enabled: bool,
    pub reject_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    pub enabled: bool,
    pub reject_below: f64,
}

/// Placeholder for on-screen text rejection, which needs a learned
/// detector; enabling it is a validation error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextConfig {
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub version: u32,
    pub clip_seconds: f64,
    /// Frames per second sampled for the per-video filters.
    pub sample_fps: f64,
    /// Split inside cut-free segments only.
    pub cut_aware_split: bool,
    pub likes: LikesConfig,
    pub format: FormatConfig,
    pub half_similarity: HalfSimilarityConfig,
    #[serde(rename = "static")]
    pub static_check: StaticConfig,
    pub motion: MotionConfig,
    pub cut: CutConfig,
    pub blackness: BlacknessConfig,
    pub variance: VarianceConfig,
    pub text: TextConfig,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            version: formats::SCHEMA_VERSION,
            clip_seconds: 10.0,
            sample_fps: 1.0,
            cut_aware_split: false,
            likes: LikesConfig {
                enabled: true,
                min_exclusive: 50,
            },
            format: FormatConfig {
                enabled: true,
                params: FormatParams::default(),
            },
            half_similarity: HalfSimilarityConfig {
                enabled: true,
                reject_below: 0.15,
            },
            static_check: StaticConfig {
                enabled: true,
                reject_below: 1e-4,
                samples: 8,
                subtract_mean: true,
            },
            motion: MotionConfig {
                enabled: true,
                reject_below: 0.5,
                params: fine::MotionParams::default(),
            },
            cut: CutConfig {
                enabled: true,
                threshold: 0.6,
            },
            blackness: BlacknessConfig {
                enabled: true,
                reject_above: 0.4,
            },
            variance: VarianceConfig {
                enabled: true,
                reject_below: 1e-3,
            },
            text: TextConfig { enabled: false },
        }
    }
}

fn in_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::validation(format!("{name} must be in [0, 1], got {v}")));
    }
    Ok(())
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_seconds.is_finite() && self.clip_seconds > 0.0) {
            return Err(Error::validation("clip_seconds must be positive"));
        }
        if !(self.sample_fps.is_finite() && self.sample_fps > 0.0) {
            return Err(Error::validation("sample_fps must be positive"));
        }
        let f = &self.format.params;
        in_unit("format.center_band", f.center_band)?;
        in_unit("format.boundary_band", f.boundary_band)?;
        in_unit("format.line_coverage", f.line_coverage)?;
        in_unit("format.persistence", f.persistence)?;
        in_unit("half_similarity.reject_below", self.half_similarity.reject_below)?;
        if !(self.static_check.reject_below >= 0.0) || self.static_check.samples < 2 {
            return Err(Error::validation("static: reject_below >= 0 and samples >= 2 required"));
        }
        if !(self.motion.reject_below >= 0.0) {
            return Err(Error::validation("motion.reject_below must be >= 0"));
        }
        let m = &self.motion.params;
        if m.levels == 0 || m.block < 4 || m.search == 0 {
            return Err(Error::validation("motion: levels >= 1, block >= 4, search >= 1 required"));
        }
        in_unit("motion.min_confidence", m.min_confidence)?;
        in_unit("motion.min_reliable_fraction", m.min_reliable_fraction)?;
        in_unit("cut.threshold", self.cut.threshold)?;
        in_unit("blackness.reject_above", self.blackness.reject_above)?;
        if !(self.variance.reject_below >= 0.0) {
            return Err(Error::validation("variance.reject_below must be >= 0"));
        }
        if self.text.enabled {
            return Err(Error::validation("the text filter is not available in this build"));
        }
        Ok(())
    }

    pub fn frames_per_clip(&self, fps: f64) -> usize {
        (self.clip_seconds * fps).round() as usize
    }
}

impl Document for FilterConfig {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub filter: String,
    pub passed: bool,
    /// Primary statistic compared against the threshold; absent when the
    /// filter had nothing to measure (e.g. no like count).
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl Verdict {
    fn new(filter: &str, passed: bool, score: Option<f64>) -> Self {
        Self {
            filter: filter.to_string(),
            passed,
            score,
            details: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub video: String,
    /// Clip number within the video; absent for video-level records.
    pub clip: Option<usize>,
    pub start: usize,
    pub end: usize,
    pub fps: f64,
    pub likes: Option<u64>,
    pub verdicts: Vec<Verdict>,
    pub accepted: bool,
    pub rejected_by: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fixed-length frame ranges. In cut-aware mode clips are laid out inside
/// each cut-free segment separately.
pub fn split_clips(total: usize, frames_per_clip: usize, cuts: Option<&[usize]>) -> Vec<(usize, usize)> {
    if frames_per_clip == 0 {
        return Vec::new();
    }
    let mut bounds = vec![0];
    if let Some(c) = cuts {
        bounds.extend(c.iter().copied().filter(|&k| k > 0 && k < total));
    }
    bounds.push(total);
    bounds.dedup();
    let mut out = Vec::new();
    for seg in bounds.windows(2) {
        let mut s = seg[0];
        while s + frames_per_clip <= seg[1] {
            out.push((s, s + frames_per_clip));
            s += frames_per_clip;
        }
    }
    out
}

fn coarse_luma(f: &EquirectFrame) -> LumaImage {
    f.to_luma().downsample(coarse::COARSE_DOWNSAMPLE)
}

/// Per-video verdicts shared by all of its clips.
pub fn coarse_verdicts(id: &str, likes: Option<u64>, clip: &VideoClip<EquirectFrame>, cfg: &FilterConfig) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    if cfg.likes.enabled {
        out.push(match likes {
            Some(n) => Verdict::new("likes", n > cfg.likes.min_exclusive, Some(n as f64)),
            None => Verdict::new("likes", true, None),
        });
    }
    let step = ((clip.fps() / cfg.sample_fps).round() as usize).max(1);
    let sampled: Vec<LumaImage> = clip.frames().iter().step_by(step).map(coarse_luma).collect();
    if cfg.format.enabled {
        let r = format_check(&sampled, &cfg.format.params)?;
        let worst = r.center_scores.iter().chain(&r.boundary_scores).fold(0.0f64, |a, b| a.max(*b));
        out.push(
            Verdict::new("format", r.is_equirect, Some(r.persistence))
                .with("max_line_coverage", worst),
        );
    }
    if cfg.half_similarity.enabled {
        let sims = sampled.iter().map(half_similarity).collect::<Result<Vec<_>>>()?;
        let n = sims.len() as f64;
        let lr = sims.iter().map(|s| s.lr_distance).sum::<f64>() / n;
        let tb = sims.iter().map(|s| s.tb_distance).sum::<f64>() / n;
        let score = lr.min(tb);
        out.push(
            Verdict::new("half_similarity", score >= cfg.half_similarity.reject_below, Some(score))
                .with("lr_distance", lr)
                .with("tb_distance", tb),
        );
    }
    if cfg.static_check.enabled {
        let picks = coarse::sample_indices(clip.len(), cfg.static_check.samples, coarse::stable_hash(id));
        let frames: Vec<LumaImage> = picks.iter().map(|&k| coarse_luma(&clip.frames()[k])).collect();
        let v = temporal_variance(&frames, cfg.static_check.subtract_mean)?;
        out.push(Verdict::new("static", v >= cfg.static_check.reject_below, Some(v)));
    }
    Ok(out)
}

/// Per-clip verdicts for `frames`.
pub fn fine_verdicts(frames: &[EquirectFrame], cfg: &FilterConfig) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    if cfg.motion.enabled {
        let luma: Vec<LumaImage> = frames.iter().map(Raster::to_luma).collect();
        let r = motion_score(&luma, &cfg.motion.params)?;
        out.push(
            Verdict::new("motion", r.reliable && r.mean_magnitude >= cfg.motion.reject_below, Some(r.mean_magnitude))
                .with("reliable_fraction", r.reliable_fraction),
        );
    }
    if cfg.cut.enabled {
        let r = cut_detect(frames, cfg.cut.threshold)?;
        out.push(
            Verdict::new("cut", r.cuts.is_empty(), Some(r.min_intersection)).with("cuts", r.cuts.len() as f64),
        );
    }
    if cfg.blackness.enabled {
        let b = frames.iter().map(black_fraction).sum::<f64>() / frames.len() as f64;
        out.push(Verdict::new("blackness", b <= cfg.blackness.reject_above, Some(b)));
    }
    if cfg.variance.enabled {
        let v = frames.iter().map(spatial_variance).sum::<f64>() / frames.len() as f64;
        out.push(Verdict::new("variance", v >= cfg.variance.reject_below, Some(v)));
    }
    Ok(out)
}

fn first_failure(verdicts: &[Verdict]) -> Option<String> {
    FILTER_ORDER
        .iter()
        .find(|name| verdicts.iter().any(|v| v.filter == **name && !v.passed))
        .map(|s| s.to_string())
}

/// Every clip record of one decoded video.
pub fn evaluate_video(
    id: &str,
    likes: Option<u64>,
    clip: &VideoClip<EquirectFrame>,
    cfg: &FilterConfig,
) -> Result<Vec<ClipRecord>> {
    cfg.validate()?;
    let coarse = coarse_verdicts(id, likes, clip, cfg)?;
    let per_clip = cfg.frames_per_clip(clip.fps());
    let cuts = if cfg.cut_aware_split {
        Some(cut_detect(clip.frames(), cfg.cut.threshold)?.cuts)
    } else {
        None
    };
    let ranges = split_clips(clip.len(), per_clip, cuts.as_deref());
    if ranges.is_empty() {
        let mut verdicts = coarse;
        verdicts.push(Verdict::new("length", false, Some(clip.len() as f64)));
        return Ok(vec![ClipRecord {
            video: id.to_string(),
            clip: None,
            start: 0,
            end: clip.len(),
            fps: clip.fps(),
            likes,
            rejected_by: first_failure(&verdicts).or(Some("length".to_string())),
            accepted: false,
            verdicts,
            error: None,
        }]);
    }
    ranges
        .iter()
        .enumerate()
        .map(|(i, &(s, e))| {
            let mut verdicts = coarse.clone();
            verdicts.extend(fine_verdicts(&clip.frames()[s..e], cfg)?);
            let rejected_by = first_failure(&verdicts);
            Ok(ClipRecord {
                video: id.to_string(),
                clip: Some(i),
                start: s,
                end: e,
                fps: clip.fps(),
                likes,
                accepted: rejected_by.is_none(),
                rejected_by,
                verdicts,
                error: None,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub videos: usize,
    pub clips: usize,
    pub accepted: usize,
    pub rejected_by: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub records: Vec<ClipRecord>,
    pub summary: PipelineSummary,
}

impl PipelineReport {
    pub fn accepted(&self) -> impl Iterator<Item = &ClipRecord> {
        self.records.iter().filter(|r| r.accepted)
    }

    /// One canonical JSON object per clip record.
    pub fn to_jsonl(&self) -> Result<String> {
        formats::to_jsonl(&self.records)
    }
}

fn load_and_evaluate(root: &Path, entry: &CorpusEntry, cfg: &FilterConfig) -> Vec<ClipRecord> {
    let result = formats::read_equirect_clip(&root.join(&entry.path)).and_then(|(_, clip)| {
        let clip = VideoClip::new(clip.into_frames(), entry.fps)?;
        evaluate_video(&entry.id, entry.likes, &clip, cfg)
    });
    result.unwrap_or_else(|e| {
        vec![ClipRecord {
            video: entry.id.clone(),
            clip: None,
            start: 0,
            end: 0,
            fps: entry.fps,
            likes: entry.likes,
            verdicts: Vec::new(),
            accepted: false,
            rejected_by: Some(e.kind().to_string()),
            error: Some(e.to_string()),
        }]
    })
}

/// Runs the cascade over every video of a corpus. `root` is the directory
/// the manifest paths are relative to. Unreadable videos become rejected
/// records; the run itself only fails on an invalid manifest or config.
pub fn run_pipeline(manifest: &CorpusManifest, root: &Path, cfg: &FilterConfig) -> Result<PipelineReport> {
    manifest.validate()?;
    cfg.validate()?;
    let records: Vec<ClipRecord> = par::map(&manifest.videos, |entry| load_and_evaluate(root, entry, cfg))
        .into_iter()
        .flatten()
        .collect();
    let mut rejected_by = BTreeMap::new();
    for r in &records {
        if let Some(f) = &r.rejected_by {
            *rejected_by.entry(f.clone()).or_insert(0) += 1;
        }
    }
    Ok(PipelineReport {
        summary: PipelineSummary {
            videos: manifest.videos.len(),
            clips: records.iter().filter(|r| r.clip.is_some()).count(),
            accepted: records.iter().filter(|r| r.accepted).count(),
            rejected_by,
        },
        records,
    })
}
