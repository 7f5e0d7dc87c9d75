//! Perspective <-> equirectangular resampling and clip alignment.
//!
//! Both directions use inverse mapping: every destination pixel computes its
//! ray and samples the source, so neither output has holes.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    ndc_to_camera_ray, relative_pose, spherical_to_equirect_unchecked, spherical_unchecked,
    Direction3, EulerPose, FieldOfView, NdcCoord,
};
use crate::par;
use crate::raster::{
    sample_bilinear_wrapped, EquirectFrame, PerspectiveFrame, Raster, Rgb, VideoClip, BLACK,
};

/// Smallest equirectangular height accepted by [`project_to_equirect`].
pub const MIN_EQUIRECT_HEIGHT: usize = 64;

/// Default working resolution (512x1024).
pub const DEFAULT_EQUIRECT_HEIGHT: usize = 512;

/// Per-frame camera orientations for one clip with a shared field of view.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub poses: Vec<EulerPose>,
    pub fov: FieldOfView,
}

impl Trajectory {
    pub fn new(poses: Vec<EulerPose>, fov: FieldOfView) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::invalid("a trajectory needs at least one pose"));
        }
        Ok(Self { poses, fov })
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Pinhole frustum test in the camera frame. Returns the source pixel
/// position for rays that land inside the image.
#[inline]
fn frustum_lookup(cam: &Direction3, tx: f64, ty: f64, w: f64, h: f64) -> Option<(f64, f64)> {
    if cam.x <= 0.0 {
        return None;
    }
    let sx = cam.y / cam.x;
    let sz = cam.z / cam.x;
    if sx.abs() > tx || sz.abs() > ty {
        return None;
    }
    let x_ndc = sx / tx;
    let y_ndc = -sz / ty;
    Some((w * (1.0 + x_ndc) / 2.0, h * (1.0 + y_ndc) / 2.0))
}

/// Splats a perspective frame onto a masked equirectangular canvas of
/// height `height` (width `2 * height`). Directions outside the view
/// frustum stay black with `mask = false`.
pub fn project_to_equirect(
    frame: &PerspectiveFrame,
    pose: &EulerPose,
    fov: &FieldOfView,
    height: usize,
) -> Result<EquirectFrame> {
    if height < MIN_EQUIRECT_HEIGHT {
        return Err(Error::invalid(format!(
            "equirect height must be at least {MIN_EQUIRECT_HEIGHT}, got {height}"
        )));
    }
    let width = 2 * height;
    let world_to_cam = pose.rotation().transpose();
    let (tx, ty) = fov.half_tangents();
    let (fw, fh) = (frame.width() as f64, frame.height() as f64);

    let cols: Vec<(f64, f64)> = (0..width)
        .map(|j| (j as f64 * TAU / width as f64 - PI).sin_cos())
        .collect();

    let mut buf: Vec<(Rgb, bool)> = vec![(BLACK, false); width * height];
    par::for_each_row(&mut buf, width, |r, row| {
        let phi = FRAC_PI_2 - r as f64 * PI / height as f64;
        let (sp, cp) = phi.sin_cos();
        for (px, &(st, ct)) in row.iter_mut().zip(&cols) {
            let world = Direction3::new(cp * ct, cp * st, sp);
            let cam = world_to_cam.apply(&world);
            if let Some((u, v)) = frustum_lookup(&cam, tx, ty, fw, fh) {
                *px = (frame.sample_bilinear(u, v), true);
            }
        }
    });
    let (rgb, mask) = buf.into_iter().unzip();
    EquirectFrame::new(width, height, rgb, mask)
}

/// Renders the pinhole view `(pose, fov)` of a panorama at `width x height`.
pub fn unwrap_to_perspective(
    pano: &EquirectFrame,
    pose: &EulerPose,
    fov: &FieldOfView,
    width: usize,
    height: usize,
) -> Result<PerspectiveFrame> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("output dimensions must be positive"));
    }
    let cam_to_world = pose.rotation();
    let (pw, ph) = (pano.width() as f64, pano.height() as f64);
    let mut rgb = vec![BLACK; width * height];
    par::for_each_row(&mut rgb, width, |j, row| {
        let y = 2.0 * j as f64 / height as f64 - 1.0;
        for (i, px) in row.iter_mut().enumerate() {
            let x = 2.0 * i as f64 / width as f64 - 1.0;
            let ray = ndc_to_camera_ray(NdcCoord { x, y }, fov);
            let world = cam_to_world.apply(&ray);
            let s = spherical_unchecked(&world, 1.0);
            let c = spherical_to_equirect_unchecked(s, pw, ph);
            *px = sample_bilinear_wrapped(pano, c);
        }
    });
    PerspectiveFrame::new(width, height, rgb)
}

/// Projects every frame into the coordinate frame of the first one.
pub fn align_clip(
    clip: &VideoClip<PerspectiveFrame>,
    traj: &Trajectory,
    height: usize,
) -> Result<VideoClip<EquirectFrame>> {
    if traj.len() != clip.len() {
        return Err(Error::invalid(format!(
            "trajectory has {} poses but the clip has {} frames",
            traj.len(),
            clip.len()
        )));
    }
    let origin = traj.poses[0];
    let frames = clip
        .frames()
        .iter()
        .zip(&traj.poses)
        .map(|(frame, pose)| {
            let rel = relative_pose(pose, &origin).pose;
            project_to_equirect(frame, &rel, &traj.fov, height)
        })
        .collect::<Result<Vec<_>>>()?;
    VideoClip::new(frames, clip.fps())
}

/// One generation window over `[start, end)`; the first `context` frames
/// are shared with the previous window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
    pub context: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub windows: Vec<Window>,
    pub window: usize,
    pub context: usize,
}

impl WindowPlan {
    /// `[0,25) [20,45)` style rendering.
    pub fn describe(&self) -> String {
        self.windows
            .iter()
            .map(|w| format!("[{},{})", w.start, w.end))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Schedules overlapping windows of `window` frames over `total` frames,
/// advancing by `window - context`. Consecutive windows always share
/// exactly `context` frames; when the stride does not divide evenly the
/// last window is shorter than `window`.
pub fn plan_windows(total: usize, window: usize, context: usize) -> Result<WindowPlan> {
    if !(0 < context && context < window && window <= total) {
        return Err(Error::invalid(format!(
            "need 0 < context < window <= total, got context={context} window={window} total={total}"
        )));
    }
    let mut windows = vec![Window {
        start: 0,
        end: window,
        context: 0,
    }];
    while let Some(&last) = windows.last() {
        if last.end >= total {
            break;
        }
        let start = last.end - context;
        windows.push(Window {
            start,
            end: (start + window).min(total),
            context,
        });
    }
    Ok(WindowPlan {
        windows,
        window,
        context,
    })
}
