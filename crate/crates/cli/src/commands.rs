//! Subcommands. Angles are degrees on the command line and radians inside.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use panokit::blend::{blend_pair, latitude_weights, DEFAULT_LATITUDE_DELTA};
use panokit::camera_sim::{sample_params, simulate_trajectory, ParamRanges};
use panokit::filter::{run_pipeline, FilterConfig};
use panokit::formats::{self, AnnotationFile, ClipManifest, CorpusManifest, Document, RasterKind, TrajectoryFile};
use panokit::geometry::{EulerPose, FieldOfView};
use panokit::metrics::{line_consistency, masked_psnr_clip, AnnotatedView, HoughParams, DEFAULT_MIN_SCORE};
use panokit::projection::{align_clip, plan_windows, project_to_equirect, Trajectory, DEFAULT_EQUIRECT_HEIGHT};
use panokit::raster::{EquirectFrame, Raster, VideoClip};
use panokit::synth::{adversarial_corpus, write_corpus};
use panokit::{Error, Result};
use serde::Serialize;

use crate::ops::{self, ViewRequest};

#[derive(Parser, Debug)]
#[command(name = "panokit", version, about = "360-degree video geometry, metrics and curation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Splat each perspective frame onto an equirect canvas at its absolute pose
    Project(ProjectArgs),
    /// Splat each frame at its pose relative to the first frame
    Align(ProjectArgs),
    /// Render one perspective view of an equirect frame
    Unwrap(UnwrapArgs),
    /// Draw motion parameters from a seed and write the trajectory
    Simulate(SimulateArgs),
    /// Merge an equirect clip with its half-turned regeneration
    Blend(BlendArgs),
    /// Write the per-row latitude loss weights as a 16-bit PNG
    Weightmap(WeightmapArgs),
    /// Run the curation cascade over a corpus
    Filter(FilterArgs),
    /// Evaluation metrics
    #[command(subcommand)]
    Metric(MetricCommand),
    /// Unwrap every frame at a linearly sweeping yaw
    Sweep(SweepArgs),
    /// Print the generation windows for a long sequence
    Plan(PlanArgs),
    /// Serve clips, views and annotations over HTTP
    Serve(ServeArgs),
    /// Write the synthetic curation corpus
    GenCorpus(GenCorpusArgs),
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// Perspective clip directory
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Trajectory file; defaults to the one named in the manifest
    #[arg(long)]
    pub traj: Option<PathBuf>,
    /// Equirect height in pixels (width is twice this)
    #[arg(long, default_value_t = DEFAULT_EQUIRECT_HEIGHT)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ViewArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub yaw: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub pitch: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub roll: f64,
    #[arg(long, default_value_t = ops::DEFAULT_HFOV)]
    pub hfov: f64,
    #[arg(long, default_value_t = ops::DEFAULT_VFOV)]
    pub vfov: f64,
}

#[derive(Args, Debug)]
pub struct UnwrapArgs {
    /// Equirect clip directory
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub frame: usize,
    #[command(flatten)]
    pub view: ViewArgs,
    #[arg(long, default_value_t = ops::DEFAULT_VIEW_WIDTH)]
    pub width: usize,
    #[arg(long, default_value_t = ops::DEFAULT_VIEW_HEIGHT)]
    pub height: usize,
    /// Output PNG
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub frames: usize,
    #[arg(long)]
    pub seed: u64,
    /// JSON sampling ranges (radians); defaults to the built-in ranges
    #[arg(long)]
    pub ranges: Option<PathBuf>,
    /// Override the sampled field of view
    #[arg(long, requires = "vfov")]
    pub hfov: Option<f64>,
    #[arg(long, requires = "hfov")]
    pub vfov: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BlendArgs {
    /// Equirect clip
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Regeneration in the half-turned frame
    #[arg(long)]
    pub rotated: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct WeightmapArgs {
    #[arg(long, default_value_t = DEFAULT_EQUIRECT_HEIGHT)]
    pub height: usize,
    #[arg(long, default_value_t = DEFAULT_LATITUDE_DELTA)]
    pub delta: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    /// Corpus manifest; video paths are relative to its directory
    #[arg(long)]
    pub corpus: PathBuf,
    /// Threshold overrides; defaults to the built-in configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Verdict JSON lines; printed to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum MetricCommand {
    /// Line consistency of annotations against a panorama clip
    Lines(LinesArgs),
    /// Masked PSNR between two clips
    Psnr(PsnrArgs),
}

#[derive(Args, Debug)]
pub struct LinesArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    /// Equirect clip directory
    #[arg(long)]
    pub pano: PathBuf,
    /// Pose and field of view of the annotated view
    #[command(flatten)]
    pub view: ViewArgs,
    /// Neighbor yaw offsets from the annotated view, degrees
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-30.0, 30.0])]
    pub neighbor_yaw: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_MIN_SCORE)]
    pub min_score: f64,
    /// JSON line detector parameters
    #[arg(long)]
    pub hough: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MaskSource {
    /// Observed pixels of the ground truth
    Gt,
    /// Observed pixels of the prediction
    Pred,
    /// Pixels observed in both
    Both,
    /// Every pixel
    All,
}

#[derive(Args, Debug)]
pub struct PsnrArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value_t = MaskSource::Gt)]
    pub mask: MaskSource,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Equirect clip directory
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, allow_hyphen_values = true, default_value_t = -180.0)]
    pub from_yaw: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 180.0)]
    pub to_yaw: f64,
    #[arg(long, default_value_t = ops::DEFAULT_HFOV)]
    pub hfov: f64,
    #[arg(long, default_value_t = ops::DEFAULT_VFOV)]
    pub vfov: f64,
    #[arg(long, default_value_t = ops::DEFAULT_VIEW_WIDTH)]
    pub width: usize,
    #[arg(long, default_value_t = ops::DEFAULT_VIEW_HEIGHT)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long)]
    pub total: usize,
    #[arg(long, default_value_t = 25)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub context: usize,
    /// Print the plan as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Directory whose subdirectories are clips
    #[arg(long)]
    pub root: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
}

#[derive(Args, Debug)]
pub struct GenCorpusArgs {
    #[arg(long)]
    pub out: PathBuf,
}

fn trajectory_for(dir: &Path, m: &ClipManifest, explicit: Option<&Path>) -> Result<Trajectory> {
    let path = ops::trajectory_path(dir, m, explicit)?;
    ops::require_file(&path)?;
    ops::load_trajectory(&path, m.frame_count)
}

fn print_json<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<String> {
    match out {
        Some(p) => {
            formats::write_document(p, doc)?;
            Ok(format!("wrote {}", p.display()))
        }
        None => Ok(formats::to_canonical(doc)?.trim_end().to_string()),
    }
}

/// Runs one subcommand; the returned text goes to stdout.
pub fn run(cmd: Command) -> Result<String> {
    match cmd {
        Command::Project(a) => project(a, false),
        Command::Align(a) => project(a, true),
        Command::Unwrap(a) => unwrap(a),
        Command::Simulate(a) => simulate(a),
        Command::Blend(a) => blend(a),
        Command::Weightmap(a) => weightmap(a),
        Command::Filter(a) => filter(a),
        Command::Metric(MetricCommand::Lines(a)) => lines(a),
        Command::Metric(MetricCommand::Psnr(a)) => psnr(a),
        Command::Sweep(a) => sweep(a),
        Command::Plan(a) => plan(a),
        Command::Serve(a) => serve(a),
        Command::GenCorpus(a) => gen_corpus(a),
    }
}

fn project(a: ProjectArgs, relative: bool) -> Result<String> {
    ops::require_dir(&a.input)?;
    let m = formats::read_clip_manifest(&a.input)?;
    let traj = trajectory_for(&a.input, &m, a.traj.as_deref())?;
    let (_, clip) = formats::read_perspective_clip(&a.input)?;
    let out = if relative {
        align_clip(&clip, &traj, a.height)?
    } else {
        let frames = clip
            .frames()
            .iter()
            .zip(&traj.poses)
            .map(|(f, p)| project_to_equirect(f, p, &traj.fov, a.height))
            .collect::<Result<Vec<_>>>()?;
        VideoClip::new(frames, clip.fps())?
    };
    formats::write_equirect_clip(&a.out, &out, Some(traj.fov), None)?;
    Ok(format!("wrote {} equirect frames to {}", out.len(), a.out.display()))
}

fn unwrap(a: UnwrapArgs) -> Result<String> {
    ops::require_dir(&a.input)?;
    let req = ViewRequest {
        frame: a.frame,
        yaw: a.view.yaw,
        pitch: a.view.pitch,
        roll: a.view.roll,
        hfov: a.view.hfov,
        vfov: a.view.vfov,
        w: a.width,
        h: a.height,
    };
    let png = ops::unwrap_png(&a.input, &req)?;
    formats::write_atomic(&a.out, &png)?;
    Ok(format!("wrote {}", a.out.display()))
}

fn simulate(a: SimulateArgs) -> Result<String> {
    let ranges = match &a.ranges {
        Some(p) => {
            ops::require_file(p)?;
            formats::read_document::<ParamRanges>(p)?
        }
        None => ParamRanges::default(),
    };
    let (params, sampled) = sample_params(&ranges, a.seed)?;
    let fov = match (a.hfov, a.vfov) {
        (Some(h), Some(v)) => FieldOfView::from_degrees(h, v)?,
        _ => sampled,
    };
    let poses = simulate_trajectory(&params, a.frames)?;
    let traj = Trajectory::new(poses, fov)?;
    TrajectoryFile::from_trajectory(&traj, Some(params)).write(&a.out)?;
    Ok(format!("wrote {} poses to {}", a.frames, a.out.display()))
}

fn blend(a: BlendArgs) -> Result<String> {
    ops::require_dir(&a.input)?;
    ops::require_dir(&a.rotated)?;
    let (m, clip) = formats::read_equirect_clip(&a.input)?;
    let (_, rotated) = formats::read_equirect_clip(&a.rotated)?;
    if clip.len() != rotated.len() {
        return Err(Error::validation(format!(
            "clips have {} and {} frames",
            clip.len(),
            rotated.len()
        )));
    }
    let frames = clip
        .frames()
        .iter()
        .zip(rotated.frames())
        .map(|(f, r)| blend_pair(f, r))
        .collect::<Result<Vec<_>>>()?;
    let fov = m.fov.map(|f| f.to_fov()).transpose()?;
    formats::write_equirect_clip(&a.out, &VideoClip::new(frames, clip.fps())?, fov, None)?;
    Ok(format!("wrote {} blended frames to {}", clip.len(), a.out.display()))
}

fn weightmap(a: WeightmapArgs) -> Result<String> {
    let map = latitude_weights(a.height, a.delta)?;
    let w = 2 * a.height;
    let values: Vec<f64> = map.weights.iter().flat_map(|&v| std::iter::repeat_n(v, w)).collect();
    formats::write_atomic(&a.out, &formats::encode_gray16_png(w, a.height, &values)?)?;
    Ok(format!(
        "wrote {}x{} weights in [{}, {}] to {}",
        w,
        a.height,
        map.floor(),
        map.ceiling(),
        a.out.display()
    ))
}

fn filter(a: FilterArgs) -> Result<String> {
    ops::require_file(&a.corpus)?;
    let cfg = match &a.config {
        Some(p) => {
            ops::require_file(p)?;
            FilterConfig::read(p)?
        }
        None => FilterConfig::default(),
    };
    let manifest = CorpusManifest::read(&a.corpus)?;
    let root = a.corpus.parent().unwrap_or(Path::new("."));
    let report = run_pipeline(&manifest, root, &cfg)?;
    let jsonl = report.to_jsonl()?;
    match &a.out {
        Some(p) => {
            formats::write_atomic(p, jsonl.as_bytes())?;
            Ok(formats::to_canonical_line(&report.summary)?)
        }
        None => Ok(jsonl.trim_end().to_string()),
    }
}

fn lines(a: LinesArgs) -> Result<String> {
    ops::require_file(&a.annotations)?;
    ops::require_dir(&a.pano)?;
    let ann = AnnotationFile::read(&a.annotations)?;
    let params = match &a.hough {
        Some(p) => {
            ops::require_file(p)?;
            formats::read_document::<HoughParams>(p)?
        }
        None => HoughParams::default(),
    };
    let pose = EulerPose::from_degrees(a.view.roll, a.view.pitch, a.view.yaw)?;
    let view = AnnotatedView {
        width: ann.width,
        height: ann.height,
        fov: FieldOfView::from_degrees(a.view.hfov, a.view.vfov)?,
        pose,
        lines: ann.segments()?,
    };
    let neighbors = a
        .neighbor_yaw
        .iter()
        .map(|d| EulerPose::from_degrees(a.view.roll, a.view.pitch, a.view.yaw + d))
        .collect::<Result<Vec<_>>>()?;
    let (_, pano) = formats::read_equirect_clip(&a.pano)?;
    let report = line_consistency(&view, &pano, &neighbors, &params, a.min_score)?;
    print_json(&report, a.out.as_deref())
}

#[derive(Serialize)]
struct PsnrReport {
    psnr_db: f64,
    frames: usize,
    masked_pixels: usize,
}

fn mask_of(gt: &EquirectFrame, pred: &EquirectFrame, src: MaskSource) -> Vec<bool> {
    match src {
        MaskSource::Gt => gt.mask().to_vec(),
        MaskSource::Pred => pred.mask().to_vec(),
        MaskSource::Both => gt.mask().iter().zip(pred.mask()).map(|(a, b)| *a && *b).collect(),
        MaskSource::All => vec![true; gt.pixels().len()],
    }
}

fn psnr(a: PsnrArgs) -> Result<String> {
    ops::require_dir(&a.gt)?;
    ops::require_dir(&a.pred)?;
    let kind = formats::read_clip_manifest(&a.gt)?.kind;
    let (psnr_db, frames, masked_pixels) = match kind {
        RasterKind::Equirect => {
            let (_, gt) = formats::read_equirect_clip(&a.gt)?;
            let (_, pred) = formats::read_equirect_clip(&a.pred)?;
            if gt.len() != pred.len() {
                return Err(Error::validation("clips differ in length"));
            }
            let masks: Vec<Vec<bool>> = gt
                .frames()
                .iter()
                .zip(pred.frames())
                .map(|(g, p)| mask_of(g, p, a.mask))
                .collect();
            let n = masks.iter().map(|m| m.iter().filter(|&&b| b).count()).sum();
            (masked_psnr_clip(&gt, &pred, &masks)?, gt.len(), n)
        }
        RasterKind::Perspective => {
            let (_, gt) = formats::read_perspective_clip(&a.gt)?;
            let (_, pred) = formats::read_perspective_clip(&a.pred)?;
            let masks = vec![vec![true; gt.width() * gt.height()]; gt.len()];
            let n = gt.len() * gt.width() * gt.height();
            (masked_psnr_clip(&gt, &pred, &masks)?, gt.len(), n)
        }
    };
    formats::to_canonical_line(&PsnrReport {
        psnr_db,
        frames,
        masked_pixels,
    })
}

fn sweep(a: SweepArgs) -> Result<String> {
    ops::require_dir(&a.input)?;
    let (_, pano) = formats::read_equirect_clip(&a.input)?;
    let fov = FieldOfView::from_degrees(a.hfov, a.vfov)?;
    let (views, poses) = panokit::metrics::yaw_sweep_unwrap(
        &pano,
        a.from_yaw.to_radians(),
        a.to_yaw.to_radians(),
        &fov,
        a.width,
        a.height,
    )?;
    let traj_name = "trajectory.json";
    formats::write_perspective_clip(&a.out, &views, Some(fov), Some(traj_name.to_string()))?;
    TrajectoryFile::from_trajectory(&Trajectory::new(poses, fov)?, None).write(&a.out.join(traj_name))?;
    Ok(format!("wrote {} views to {}", views.len(), a.out.display()))
}

fn plan(a: PlanArgs) -> Result<String> {
    let p = plan_windows(a.total, a.window, a.context)?;
    if a.json {
        Ok(formats::to_canonical(&p)?.trim_end().to_string())
    } else {
        Ok(p.describe())
    }
}

fn serve(a: ServeArgs) -> Result<String> {
    ops::require_dir(&a.root)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io(&a.root, e))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(a.bind)
            .await
            .map_err(|e| Error::io(a.bind.to_string(), e))?;
        eprintln!("serving {} on http://{}", a.root.display(), a.bind);
        axum::serve(listener, crate::service::router(a.root.clone()))
            .await
            .map_err(|e| Error::io(a.bind.to_string(), e))
    })?;
    Ok(String::new())
}

fn gen_corpus(a: GenCorpusArgs) -> Result<String> {
    let videos = adversarial_corpus()?;
    let m = write_corpus(&a.out, &videos)?;
    Ok(format!("wrote {} videos to {}", m.videos.len(), a.out.display()))
}
