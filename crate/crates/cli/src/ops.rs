//! Pieces shared by the command line and the HTTP service.

use std::path::{Path, PathBuf};

use panokit::formats::{self, ClipManifest, Document, TrajectoryFile};
use panokit::geometry::{EulerPose, FieldOfView};
use panokit::projection::{unwrap_to_perspective, Trajectory};
use panokit::{Error, Result};
use serde::Deserialize;

pub const DEFAULT_VIEW_WIDTH: usize = 512;
pub const DEFAULT_VIEW_HEIGHT: usize = 384;
pub const DEFAULT_HFOV: f64 = 90.0;
pub const DEFAULT_VFOV: f64 = 73.74;

/// A perspective view of one panorama frame. Angles are in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewRequest {
    pub frame: usize,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub hfov: f64,
    pub vfov: f64,
    pub w: usize,
    pub h: usize,
}

impl Default for ViewRequest {
    fn default() -> Self {
        Self {
            frame: 0,
            yaw: 0.0,
            pitch: 0.0,
            roll: 0.0,
            hfov: DEFAULT_HFOV,
            vfov: DEFAULT_VFOV,
            w: DEFAULT_VIEW_WIDTH,
            h: DEFAULT_VIEW_HEIGHT,
        }
    }
}

impl ViewRequest {
    pub fn pose(&self) -> Result<EulerPose> {
        EulerPose::from_degrees(self.roll, self.pitch, self.yaw)
    }

    pub fn fov(&self) -> Result<FieldOfView> {
        FieldOfView::from_degrees(self.hfov, self.vfov)
    }
}

/// Renders the requested view of an equirect clip directory as PNG bytes.
pub fn unwrap_png(dir: &Path, req: &ViewRequest) -> Result<Vec<u8>> {
    let pose = req.pose()?;
    let fov = req.fov()?;
    let m = ClipManifest::read(&dir.join(formats::MANIFEST_FILE))?;
    let pano = formats::read_equirect_frame(dir, &m, req.frame)?;
    let view = unwrap_to_perspective(&pano, &pose, &fov, req.w, req.h)?;
    formats::encode_perspective_png(&view)
}

pub fn require_dir(path: &Path) -> Result<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "directory not found")))
    }
}

pub fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "file not found")))
    }
}

/// The trajectory named on the command line, else the one the manifest
/// points at.
pub fn trajectory_path(dir: &Path, m: &ClipManifest, explicit: Option<&Path>) -> Result<PathBuf> {
    match (explicit, &m.trajectory) {
        (Some(p), _) => Ok(p.to_path_buf()),
        (None, Some(rel)) => Ok(dir.join(rel)),
        (None, None) => Err(Error::validation(format!(
            "{}: manifest names no trajectory; pass --traj",
            dir.display()
        ))),
    }
}

pub fn load_trajectory(path: &Path, frames: usize) -> Result<Trajectory> {
    let t = TrajectoryFile::read(path)?.to_trajectory()?;
    if t.len() != frames {
        return Err(Error::validation(format!(
            "{} has {} poses but the clip has {frames} frames",
            path.display(),
            t.len()
        )));
    }
    Ok(t)
}
