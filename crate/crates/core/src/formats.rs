//! On-disk documents and frame sequences.
//!
//! Structured documents are JSON. The canonical form is pretty-printed with
//! object keys in sorted order, every non-integer number rounded to nine
//! significant digits and a trailing newline, so `write(read(bytes)) ==
//! bytes` for any canonical input. Every document carries `"version": 1`
//! and readers reject other versions before looking at the rest.
//!
//! Frames are PNG files named by a `printf`-style pattern with a single
//! zero-padded index (`frame_%05d.png`). Equirectangular frames are RGBA
//! with the observation mask in the alpha channel; perspective frames are
//! RGB.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ImageBuffer, Luma, Rgb as PixRgb, Rgba};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::camera_sim::MotionParams;
use crate::error::{Error, Result};
use crate::geometry::{EulerPose, FieldOfView};
use crate::metrics::lines::LineSegment;
use crate::projection::Trajectory;
use crate::raster::{EquirectFrame, PerspectiveFrame, Raster, Rgb, VideoClip};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_FRAME_PATTERN: &str = "frame_%05d.png";
pub const MANIFEST_FILE: &str = "manifest.json";

// ---------------------------------------------------------------------------
// canonical JSON

fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig9(n.as_f64().unwrap_or(0.0));
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Canonical pretty text of a document, ending with a newline.
pub fn to_canonical<T: Serialize>(doc: &T) -> Result<String> {
    let mut v = serde_json::to_value(doc).map_err(|e| Error::validation(e.to_string()))?;
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Single-line canonical form, used for JSON-lines output.
pub fn to_canonical_line<T: Serialize>(doc: &T) -> Result<String> {
    let mut v = serde_json::to_value(doc).map_err(|e| Error::validation(e.to_string()))?;
    round_floats(&mut v);
    serde_json::to_string(&v).map_err(|e| Error::validation(e.to_string()))
}

fn parse_error(origin: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<Value>,
}

/// Parses a versioned document. `origin` names the source in errors.
pub fn parse_document<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    match probe.version {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(other) => {
            return Err(Error::validation(format!(
                "{origin}: unsupported schema version {other} (expected {SCHEMA_VERSION})"
            )))
        }
        None => return Err(Error::validation(format!("{origin}: missing field `version`"))),
    }
    serde_json::from_str(text).map_err(|e| parse_error(origin, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn read_document<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_document(&read_text(path)?, &path.display().to_string())
}

pub fn write_document<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    write_atomic(path, to_canonical(doc)?.as_bytes())
}

/// Parses one JSON value per non-empty line; errors carry the file line.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str, origin: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                column: e.column(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Canonical JSON lines, one record per line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut s = String::new();
    for r in records {
        s.push_str(&to_canonical_line(r)?);
        s.push('\n');
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// documents

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FovRecord {
    pub horizontal: f64,
    pub vertical: f64,
}

impl FovRecord {
    pub fn to_fov(self) -> Result<FieldOfView> {
        FieldOfView::new(self.horizontal, self.vertical).map_err(|e| Error::validation(e.to_string()))
    }
}

impl From<FieldOfView> for FovRecord {
    fn from(f: FieldOfView) -> Self {
        Self {
            horizontal: f.horizontal(),
            vertical: f.vertical(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RasterKind {
    Perspective,
    Equirect,
}

/// Describes a directory of frame files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipManifest {
    pub version: u32,
    pub kind: RasterKind,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub fps: f64,
    pub frame_pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov: Option<FovRecord>,
    /// Trajectory file relative to the clip directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
}

impl ClipManifest {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation("manifest dimensions must be positive"));
        }
        if self.kind == RasterKind::Equirect && self.width != 2 * self.height {
            return Err(Error::validation(format!(
                "equirect manifest must be 2:1, got {}x{}",
                self.width, self.height
            )));
        }
        if self.frame_count == 0 {
            return Err(Error::validation("frame_count must be at least 1"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::validation(format!("fps must be positive, got {}", self.fps)));
        }
        frame_file_name(&self.frame_pattern, 0)?;
        if let Some(f) = self.fov {
            f.to_fov()?;
        }
        Ok(())
    }

    pub fn frame_path(&self, dir: &Path, index: usize) -> Result<PathBuf> {
        Ok(dir.join(frame_file_name(&self.frame_pattern, index)?))
    }
}

/// Expands the single `%0Nd` (or `%d`) in `pattern`.
pub fn frame_file_name(pattern: &str, index: usize) -> Result<String> {
    let bad = || Error::validation(format!("frame pattern {pattern:?} must contain exactly one %0Nd"));
    let start = pattern.find('%').ok_or_else(bad)?;
    let rest = &pattern[start + 1..];
    let d = rest.find('d').ok_or_else(bad)?;
    let spec = &rest[..d];
    let width = if spec.is_empty() {
        0
    } else if let Some(w) = spec.strip_prefix('0') {
        w.parse::<usize>().map_err(|_| bad())?
    } else {
        return Err(bad());
    };
    let suffix = &rest[d + 1..];
    if suffix.contains('%') || pattern[..start].contains('/') || suffix.contains('/') {
        return Err(bad());
    }
    Ok(format!("{}{:0width$}{}", &pattern[..start], index, suffix))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub index: usize,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFile {
    pub version: u32,
    pub fov: FovRecord,
    pub frames: Vec<PoseRecord>,
    /// Parameters that generated the trajectory, when simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<MotionParams>,
}

impl TrajectoryFile {
    pub fn from_trajectory(t: &Trajectory, motion: Option<MotionParams>) -> Self {
        Self {
            version: SCHEMA_VERSION,
            fov: t.fov.into(),
            frames: t
                .poses
                .iter()
                .enumerate()
                .map(|(index, p)| PoseRecord {
                    index,
                    roll: p.roll(),
                    pitch: p.pitch(),
                    yaw: p.yaw(),
                })
                .collect(),
            motion,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fov.to_fov()?;
        if self.frames.is_empty() {
            return Err(Error::validation("trajectory has no frames"));
        }
        for (k, f) in self.frames.iter().enumerate() {
            if f.index != k {
                return Err(Error::validation(format!(
                    "frames[{k}].index is {} but indices must be contiguous from 0",
                    f.index
                )));
            }
            if !(f.roll.is_finite() && f.pitch.is_finite() && f.yaw.is_finite()) {
                return Err(Error::validation(format!("frames[{k}] has a non-finite angle")));
            }
        }
        if let Some(m) = &self.motion {
            m.validate().map_err(|e| Error::validation(format!("motion: {e}")))?;
        }
        Ok(())
    }

    pub fn to_trajectory(&self) -> Result<Trajectory> {
        self.validate()?;
        let poses = self
            .frames
            .iter()
            .map(|f| EulerPose::new(f.roll, f.pitch, f.yaw))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(poses, self.fov.to_fov()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledLine {
    pub label: String,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl LabeledLine {
    pub fn segment(&self) -> Result<LineSegment> {
        LineSegment::new(self.x1, self.y1, self.x2, self.y2)
    }
}

/// Line annotations drawn on one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationFile {
    pub version: u32,
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub lines: Vec<LabeledLine>,
}

impl AnnotationFile {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation("annotation image dimensions must be positive"));
        }
        for (k, l) in self.lines.iter().enumerate() {
            let seg = l
                .segment()
                .map_err(|e| Error::validation(format!("lines[{k}]: {e}")))?;
            if !seg.within(self.width as f64, self.height as f64) {
                return Err(Error::validation(format!(
                    "lines[{k}] ({:?}) leaves the {}x{} image",
                    l.label, self.width, self.height
                )));
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> Result<Vec<LineSegment>> {
        self.lines.iter().map(LabeledLine::segment).collect()
    }
}

/// One source video of a curation corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub id: String,
    /// Clip directory relative to the corpus manifest.
    pub path: String,
    pub fps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub version: u32,
    pub videos: Vec<CorpusEntry>,
}

impl CorpusManifest {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for v in &self.videos {
            if !seen.insert(&v.id) {
                return Err(Error::validation(format!("duplicate video id {:?}", v.id)));
            }
            if !(v.fps.is_finite() && v.fps > 0.0) {
                return Err(Error::validation(format!("video {:?}: fps must be positive", v.id)));
            }
        }
        Ok(())
    }
}

/// Reads a document and runs its validation.
pub trait Document: Serialize + DeserializeOwned {
    fn check(&self) -> Result<()>;

    fn read(path: &Path) -> Result<Self> {
        let doc: Self = read_document(path)?;
        doc.check()?;
        Ok(doc)
    }

    fn parse(text: &str, origin: &str) -> Result<Self> {
        let doc: Self = parse_document(text, origin)?;
        doc.check()?;
        Ok(doc)
    }

    fn write(&self, path: &Path) -> Result<()> {
        self.check()?;
        write_document(path, self)
    }
}

impl Document for ClipManifest {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl Document for TrajectoryFile {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl Document for AnnotationFile {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl Document for CorpusManifest {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

// ---------------------------------------------------------------------------
// frames

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn from_u8(v: u8) -> f32 {
    v as f32 / 255.0
}

fn image_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

/// PNG bytes of an equirect frame, mask in alpha. Fully observed frames
/// are written as plain RGB.
pub fn encode_equirect_png(f: &EquirectFrame) -> Result<Vec<u8>> {
    if f.mask().iter().all(|&m| m) {
        return encode_rgb(f);
    }
    let mut buf = Vec::with_capacity(f.width() * f.height() * 4);
    for (p, &m) in f.pixels().iter().zip(f.mask()) {
        buf.extend_from_slice(&[to_u8(p[0]), to_u8(p[1]), to_u8(p[2]), if m { 255 } else { 0 }]);
    }
    let img: ImageBuffer<Rgba<u8>, _> = ImageBuffer::from_raw(f.width() as u32, f.height() as u32, buf)
        .ok_or_else(|| Error::invalid("frame buffer size mismatch"))?;
    encode_png(img)
}

fn encode_rgb<F: Raster>(f: &F) -> Result<Vec<u8>> {
    let buf: Vec<u8> = f.pixels().iter().flat_map(|p| p.map(to_u8)).collect();
    let img: ImageBuffer<PixRgb<u8>, _> = ImageBuffer::from_raw(f.width() as u32, f.height() as u32, buf)
        .ok_or_else(|| Error::invalid("frame buffer size mismatch"))?;
    encode_png(img)
}

pub fn encode_perspective_png(f: &PerspectiveFrame) -> Result<Vec<u8>> {
    encode_rgb(f)
}

/// 16-bit grayscale PNG of values in `[0, 1]`, row-major.
pub fn encode_gray16_png(width: usize, height: usize, values: &[f64]) -> Result<Vec<u8>> {
    let buf: Vec<u16> = values
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let img: ImageBuffer<Luma<u16>, _> = ImageBuffer::from_raw(width as u32, height as u32, buf)
        .ok_or_else(|| Error::invalid("weight map size mismatch"))?;
    encode_png(img)
}

fn encode_png<P, C>(img: ImageBuffer<P, C>) -> Result<Vec<u8>>
where
    P: image::PixelWithColorType,
    C: std::ops::Deref<Target = [P::Subpixel]>,
    [P::Subpixel]: image::EncodableLayout,
{
    let mut out = Vec::new();
    img.write_with_encoder(PngEncoder::new_with_quality(&mut out, CompressionType::Best, FilterType::Adaptive))
        .map_err(|e| Error::Image {
            path: PathBuf::from("<memory>"),
            message: e.to_string(),
        })?;
    Ok(out)
}

fn load_image(path: &Path) -> Result<image::DynamicImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    image::load_from_memory_with_format(&bytes, image::ImageFormat::Png).map_err(|e| image_error(path, e))
}

/// Reads a PNG as an equirect frame; images without alpha are fully observed.
pub fn read_equirect_png(path: &Path) -> Result<EquirectFrame> {
    let img = load_image(path)?;
    let has_alpha = img.color().has_alpha();
    let rgba = img.to_rgba8();
    let (w, h) = (rgba.width() as usize, rgba.height() as usize);
    let mut rgb: Vec<Rgb> = Vec::with_capacity(w * h);
    let mut mask = Vec::with_capacity(w * h);
    for p in rgba.pixels() {
        rgb.push([from_u8(p[0]), from_u8(p[1]), from_u8(p[2])]);
        mask.push(!has_alpha || p[3] >= 128);
    }
    EquirectFrame::new(w, h, rgb, mask).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

pub fn read_perspective_png(path: &Path) -> Result<PerspectiveFrame> {
    let rgb8 = load_image(path)?.to_rgb8();
    let (w, h) = (rgb8.width() as usize, rgb8.height() as usize);
    let rgb = rgb8.pixels().map(|p| [from_u8(p[0]), from_u8(p[1]), from_u8(p[2])]).collect();
    PerspectiveFrame::new(w, h, rgb).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

pub fn write_equirect_png(path: &Path, f: &EquirectFrame) -> Result<()> {
    write_atomic(path, &encode_equirect_png(f)?)
}

pub fn write_perspective_png(path: &Path, f: &PerspectiveFrame) -> Result<()> {
    write_atomic(path, &encode_perspective_png(f)?)
}

// ---------------------------------------------------------------------------
// clip directories

/// Reads and validates `dir/manifest.json`, checking every frame exists.
pub fn read_clip_manifest(dir: &Path) -> Result<ClipManifest> {
    let m = ClipManifest::read(&dir.join(MANIFEST_FILE))?;
    for k in 0..m.frame_count {
        let p = m.frame_path(dir, k)?;
        if !p.is_file() {
            return Err(Error::validation(format!("missing frame file {}", p.display())));
        }
    }
    Ok(m)
}

fn check_dims(path: &Path, m: &ClipManifest, w: usize, h: usize) -> Result<()> {
    if (w, h) != (m.width, m.height) {
        return Err(Error::validation(format!(
            "{} is {w}x{h} but the manifest declares {}x{}",
            path.display(),
            m.width,
            m.height
        )));
    }
    Ok(())
}

fn expect_kind(dir: &Path, m: &ClipManifest, kind: RasterKind) -> Result<()> {
    if m.kind != kind {
        return Err(Error::validation(format!(
            "{}: expected a {kind:?} clip, found {:?}",
            dir.display(),
            m.kind
        )));
    }
    Ok(())
}

/// Loads a single frame of an equirect clip directory.
pub fn read_equirect_frame(dir: &Path, m: &ClipManifest, index: usize) -> Result<EquirectFrame> {
    expect_kind(dir, m, RasterKind::Equirect)?;
    if index >= m.frame_count {
        return Err(Error::invalid(format!("frame {index} out of range (clip has {})", m.frame_count)));
    }
    let p = m.frame_path(dir, index)?;
    let f = read_equirect_png(&p)?;
    check_dims(&p, m, f.width(), f.height())?;
    Ok(f)
}

pub fn read_equirect_clip(dir: &Path) -> Result<(ClipManifest, VideoClip<EquirectFrame>)> {
    let m = read_clip_manifest(dir)?;
    let frames = (0..m.frame_count)
        .map(|k| read_equirect_frame(dir, &m, k))
        .collect::<Result<Vec<_>>>()?;
    let clip = VideoClip::new(frames, m.fps)?;
    Ok((m, clip))
}

pub fn read_perspective_clip(dir: &Path) -> Result<(ClipManifest, VideoClip<PerspectiveFrame>)> {
    let m = read_clip_manifest(dir)?;
    expect_kind(dir, &m, RasterKind::Perspective)?;
    let frames = (0..m.frame_count)
        .map(|k| {
            let p = m.frame_path(dir, k)?;
            let f = read_perspective_png(&p)?;
            check_dims(&p, &m, f.width(), f.height())?;
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    let clip = VideoClip::new(frames, m.fps)?;
    Ok((m, clip))
}

fn manifest_for<F: Raster>(clip: &VideoClip<F>, kind: RasterKind, fov: Option<FieldOfView>, trajectory: Option<String>) -> ClipManifest {
    ClipManifest {
        version: SCHEMA_VERSION,
        kind,
        width: clip.width(),
        height: clip.height(),
        frame_count: clip.len(),
        fps: clip.fps(),
        frame_pattern: DEFAULT_FRAME_PATTERN.to_string(),
        fov: fov.map(Into::into),
        trajectory,
    }
}

/// Writes frames and `manifest.json` into `dir` (created if needed).
pub fn write_equirect_clip(
    dir: &Path,
    clip: &VideoClip<EquirectFrame>,
    fov: Option<FieldOfView>,
    trajectory: Option<String>,
) -> Result<ClipManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let m = manifest_for(clip, RasterKind::Equirect, fov, trajectory);
    for (k, f) in clip.frames().iter().enumerate() {
        write_equirect_png(&m.frame_path(dir, k)?, f)?;
    }
    m.write(&dir.join(MANIFEST_FILE))?;
    Ok(m)
}

pub fn write_perspective_clip(
    dir: &Path,
    clip: &VideoClip<PerspectiveFrame>,
    fov: Option<FieldOfView>,
    trajectory: Option<String>,
) -> Result<ClipManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let m = manifest_for(clip, RasterKind::Perspective, fov, trajectory);
    for (k, f) in clip.frames().iter().enumerate() {
        write_perspective_png(&m.frame_path(dir, k)?, f)?;
    }
    m.write(&dir.join(MANIFEST_FILE))?;
    Ok(m)
}
