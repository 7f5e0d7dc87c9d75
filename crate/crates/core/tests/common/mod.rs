//! Scenes shared by the integration suites.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use panokit::geometry::{Direction3, EulerPose, FieldOfView};
use panokit::metrics::{masked_psnr, AnnotatedView, HomogeneousLine, LineSegment};
use panokit::projection::{project_to_equirect, unwrap_to_perspective};
use panokit::raster::{EquirectFrame, PerspectiveFrame, Raster, VideoClip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use panokit::synth::{great_circle_panorama, render_lines, white_noise_panorama};

pub const VIEW_W: usize = 256;
pub const VIEW_H: usize = 192;

pub fn view_fov() -> FieldOfView {
    FieldOfView::from_degrees(90.0, 2.0 * (0.75f64).atan().to_degrees()).unwrap()
}

/// Full-width lines of the self-consistency scene.
pub fn scene_lines() -> Vec<HomogeneousLine> {
    [
        (20.0, 0.0, 230.0, 191.0),
        (0.0, 60.0, 255.0, 100.0),
        (180.0, 0.0, 150.0, 191.0),
    ]
    .iter()
    .map(|&(x1, y1, x2, y2)| HomogeneousLine::through(x1, y1, x2, y2).unwrap())
    .collect()
}

pub fn clipped(lines: &[HomogeneousLine], w: usize, h: usize) -> Vec<LineSegment> {
    lines.iter().filter_map(|l| l.clip(w as f64, h as f64)).collect()
}

pub fn scene_view() -> AnnotatedView {
    AnnotatedView {
        width: VIEW_W,
        height: VIEW_H,
        fov: view_fov(),
        pose: EulerPose::IDENTITY,
        lines: clipped(&scene_lines(), VIEW_W, VIEW_H),
    }
}

/// The annotated input view splatted onto a panorama, `frames` times.
pub fn self_consistency_panorama(frames: usize) -> VideoClip<EquirectFrame> {
    let img = render_lines(VIEW_W, VIEW_H, &scene_lines(), 3.0, [0.15; 3], [0.9; 3]).unwrap();
    let pano = project_to_equirect(&img, &EulerPose::IDENTITY, &view_fov(), 1024).unwrap();
    VideoClip::new(vec![pano; frames], 8.0).unwrap()
}

pub fn noise_panorama(seed: u64) -> VideoClip<EquirectFrame> {
    VideoClip::new(vec![white_noise_panorama(1024, seed).unwrap()], 8.0).unwrap()
}

pub fn road_normals() -> Vec<Direction3> {
    vec![Direction3::new(0.15, -0.35, 1.0), Direction3::new(0.2, 1.0, 0.1)]
}

/// Image of the great circle `n . d = 0` in a pinhole view; computed from
/// the ray formula directly rather than through the homography code.
pub fn great_circle_in_view(n: &Direction3, pose: &EulerPose, fov: &FieldOfView, w: usize, h: usize) -> HomogeneousLine {
    let r = pose.rotation();
    let nc = r.transpose().apply(n);
    let (tx, ty) = fov.half_tangents();
    // n.x + n.y tx (2u/w - 1) - n.z ty (2v/h - 1) = 0
    HomogeneousLine::new(
        2.0 * nc.y * tx / w as f64,
        -2.0 * nc.z * ty / h as f64,
        nc.x - nc.y * tx + nc.z * ty,
    )
    .unwrap()
}

pub fn road_panorama() -> VideoClip<EquirectFrame> {
    let p = great_circle_panorama(1024, &road_normals(), [0.2, 0.2, 0.22], [0.75, 0.7, 0.6]).unwrap();
    VideoClip::new(vec![p], 8.0).unwrap()
}

pub fn road_view() -> AnnotatedView {
    let fov = view_fov();
    let lines = road_normals()
        .iter()
        .map(|n| great_circle_in_view(n, &EulerPose::IDENTITY, &fov, VIEW_W, VIEW_H))
        .collect::<Vec<_>>();
    AnnotatedView {
        width: VIEW_W,
        height: VIEW_H,
        fov,
        pose: EulerPose::IDENTITY,
        lines: clipped(&lines, VIEW_W, VIEW_H),
    }
}

/// Smooth colour pattern; every channel has a period of at least 24 px.
pub fn smooth_frame(w: usize, h: usize) -> PerspectiveFrame {
    PerspectiveFrame::from_fn(w, h, |x, y| {
        let (x, y) = (x as f32, y as f32);
        [
            0.5 + 0.4 * (x / 7.0).sin() * (y / 11.0).cos(),
            0.5 + 0.4 * ((x + y) / 9.0).cos(),
            0.5 + 0.3 * (y / 5.0 + 1.0).sin(),
        ]
    })
    .unwrap()
}

pub fn random_pose(rng: &mut ChaCha20Rng) -> EulerPose {
    EulerPose::new(
        rng.random_range(-PI..PI),
        rng.random_range(-FRAC_PI_2..FRAC_PI_2),
        rng.random_range(-PI..PI),
    )
    .unwrap()
}

pub fn random_fov(rng: &mut ChaCha20Rng) -> FieldOfView {
    FieldOfView::from_degrees(rng.random_range(30.0..=120.0), rng.random_range(30.0..=120.0)).unwrap()
}

pub const ROUNDTRIP_SIDE: usize = 256;
pub const ROUNDTRIP_MARGIN: usize = 8;

/// PSNR of `unwrap(project(F))` against `F` over the interior, for `n`
/// random poses and fields of view, with the equirect height `4 * side`.
pub fn roundtrip_psnrs(n: usize, seed: u64) -> Vec<f64> {
    let side = ROUNDTRIP_SIDE;
    let frame = smooth_frame(side, side);
    let interior: Vec<bool> = (0..side * side)
        .map(|i| {
            let (x, y) = (i % side, i / side);
            let inside = |c: usize| (ROUNDTRIP_MARGIN..side - ROUNDTRIP_MARGIN).contains(&c);
            inside(x) && inside(y)
        })
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let pose = random_pose(&mut rng);
            let fov = random_fov(&mut rng);
            let pano = project_to_equirect(&frame, &pose, &fov, 4 * side).unwrap();
            let back = unwrap_to_perspective(&pano, &pose, &fov, side, side).unwrap();
            masked_psnr(&frame, &back, &interior).unwrap()
        })
        .collect()
}

/// Compares `project(yaw + d)` with `project(yaw)` shifted by `d W / 2 pi`
/// columns. A pixel passes when its value lies within the range spanned by
/// the reference over the three columns nearest the shifted position,
/// widened by `tol`. `bias` adds a deliberate column error. Returns the
/// fraction of failing pixels per trial.
pub fn yaw_equivariance_failures(trials: usize, seed: u64, height: usize, tol: f32, bias: f64) -> Vec<f64> {
    let frame = smooth_frame(128, 96);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let w = 2 * height;
    (0..trials)
        .map(|_| {
            let pose = EulerPose::new(rng.random_range(-0.3..0.3), rng.random_range(-0.6..0.6), rng.random_range(-PI..PI)).unwrap();
            let fov = random_fov(&mut rng);
            let d = rng.random_range(-PI..PI);
            let moved = EulerPose::new(pose.roll(), pose.pitch(), pose.yaw() + d).unwrap();
            let a = project_to_equirect(&frame, &pose, &fov, height).unwrap();
            let b = project_to_equirect(&frame, &moved, &fov, height).unwrap();
            let shift = d * w as f64 / TAU + bias;
            let mut bad = 0usize;
            for r in 0..height {
                for j in 0..w {
                    let c = (j as f64 - shift).round() as i64;
                    let cols = [c - 1, c, c + 1].map(|c| c.rem_euclid(w as i64) as usize);
                    let masks = cols.map(|c| a.mask()[r * w + c]);
                    let bm = b.mask()[r * w + j];
                    if masks.iter().all(|&m| m != bm) {
                        bad += 1;
                        continue;
                    }
                    if !bm || !masks.iter().all(|&m| m) {
                        continue;
                    }
                    let bp = b.pixel(j, r);
                    for k in 0..3 {
                        let vals = cols.map(|c| a.pixel(c, r)[k]);
                        let lo = vals.iter().cloned().fold(f32::INFINITY, f32::min);
                        let hi = vals.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
                        if bp[k] < lo - tol || bp[k] > hi + tol {
                            bad += 1;
                            break;
                        }
                    }
                }
            }
            bad as f64 / (w * height) as f64
        })
        .collect()
}
