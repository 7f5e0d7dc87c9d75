//! Line primitives, rotation homographies and the EA similarity score.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EulerPose, FieldOfView};

/// Row-major 3x3 matrix acting on homogeneous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Result<Mat3> {
        let m = &self.0;
        let det = self.determinant();
        let scale = self
            .0
            .iter()
            .flatten()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(3) {
            return Err(Error::Singular);
        }
        let inv = 1.0 / det;
        let c = |a: usize, b: usize, c: usize, d: usize| m[a][b] * m[c][d];
        Ok(Mat3([
            [
                (c(1, 1, 2, 2) - c(1, 2, 2, 1)) * inv,
                (c(0, 2, 2, 1) - c(0, 1, 2, 2)) * inv,
                (c(0, 1, 1, 2) - c(0, 2, 1, 1)) * inv,
            ],
            [
                (c(1, 2, 2, 0) - c(1, 0, 2, 2)) * inv,
                (c(0, 0, 2, 2) - c(0, 2, 2, 0)) * inv,
                (c(0, 2, 1, 0) - c(0, 0, 1, 2)) * inv,
            ],
            [
                (c(1, 0, 2, 1) - c(1, 1, 2, 0)) * inv,
                (c(0, 1, 2, 0) - c(0, 0, 2, 1)) * inv,
                (c(0, 0, 1, 1) - c(0, 1, 1, 0)) * inv,
            ],
        ]))
    }

    /// Maps a pixel; `None` when it lands at or behind infinity (`w <= 0`).
    pub fn transfer_point(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let [u, v, w] = self.apply([x, y, 1.0]);
        (w > 0.0).then(|| (u / w, v / w))
    }
}

/// Pinhole intrinsics in pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    /// Intrinsics consistent with [`crate::geometry::pixel_to_ndc`]: the
    /// principal point is `(W/2, H/2)` and `x_ndc = +-1` at the frustum edge.
    pub fn from_fov(fov: &FieldOfView, width: usize, height: usize) -> Self {
        let (tx, ty) = fov.half_tangents();
        Self {
            fx: width as f64 / 2.0 / tx,
            fy: height as f64 / 2.0 / ty,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
        }
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])
    }

    pub fn inverse_matrix(&self) -> Mat3 {
        Mat3([
            [1.0 / self.fx, 0.0, -self.cx / self.fx],
            [0.0, 1.0 / self.fy, -self.cy / self.fy],
            [0.0, 0.0, 1.0],
        ])
    }
}

/// Optical-frame axes (x right, y down, z forward) expressed in the
/// crate's camera frame (x forward, y right, z up).
const OPTICAL_TO_CAMERA: Mat3 = Mat3([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]);

/// Pixel map from view A to view B for two cameras sharing a centre:
/// `K_B * R_B^T * R_A * K_A^-1`, with the optical/camera axis change folded
/// in on both sides.
pub fn rotation_homography(k_a: &Intrinsics, p_a: &EulerPose, k_b: &Intrinsics, p_b: &EulerPose) -> Mat3 {
    let ra = Mat3(p_a.rotation().0);
    let rbt = Mat3(p_b.rotation().transpose().0);
    let rel = rbt.mul(&ra);
    let rel_optical = OPTICAL_TO_CAMERA.transpose().mul(&rel).mul(&OPTICAL_TO_CAMERA);
    k_b.matrix().mul(&rel_optical).mul(&k_a.inverse_matrix())
}

/// Straight segment between two distinct pixel positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl LineSegment {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let s = Self { x1, y1, x2, y2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x1, self.y1, self.x2, self.y2].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("segment endpoints must be finite"));
        }
        if self.length() == 0.0 {
            return Err(Error::invalid(format!(
                "degenerate segment at ({}, {})",
                self.x1, self.y1
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        (self.x2 - self.x1).hypot(self.y2 - self.y1)
    }

    pub fn midpoint(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Direction angle folded into `[0, pi)`.
    pub fn angle(&self) -> f64 {
        let (mut dx, mut dy) = (self.x2 - self.x1, self.y2 - self.y1);
        // canonical direction so swapping endpoints is bit-exact
        if dy < 0.0 || (dy == 0.0 && dx < 0.0) {
            (dx, dy) = (-dx, -dy);
        }
        let a = dy.atan2(dx);
        if a >= std::f64::consts::PI {
            0.0
        } else {
            a
        }
    }

    pub fn line(&self) -> Result<HomogeneousLine> {
        HomogeneousLine::through(self.x1, self.y1, self.x2, self.y2)
    }

    pub fn within(&self, width: f64, height: f64) -> bool {
        let inside = |x: f64, y: f64| (0.0..=width).contains(&x) && (0.0..=height).contains(&y);
        inside(self.x1, self.y1) && inside(self.x2, self.y2)
    }
}

/// `a x + b y + c = 0` with `a^2 + b^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HomogeneousLine {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let n = a.hypot(b);
        if n == 0.0 || !n.is_finite() || !c.is_finite() {
            return Err(Error::invalid("line normal (a, b) must be nonzero and finite"));
        }
        Ok(Self {
            a: a / n,
            b: b / n,
            c: c / n,
        })
    }

    pub fn through(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        // cross product of the homogeneous points
        Self::new(y1 - y2, x2 - x1, x1 * y2 - x2 * y1)
    }

    pub fn coefficients(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    /// Signed distance of a point from the line.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }

    /// Part of the line inside `[0, width] x [0, height]`, or `None` when it
    /// misses the rectangle (or only touches a corner).
    pub fn clip(&self, width: f64, height: f64) -> Option<LineSegment> {
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(4);
        let eps = 1e-9;
        if self.b.abs() > 1e-12 {
            for x in [0.0, width] {
                let y = -(self.a * x + self.c) / self.b;
                if y >= -eps && y <= height + eps {
                    pts.push((x, y.clamp(0.0, height)));
                }
            }
        }
        if self.a.abs() > 1e-12 {
            for y in [0.0, height] {
                let x = -(self.b * y + self.c) / self.a;
                if x >= -eps && x <= width + eps {
                    pts.push((x.clamp(0.0, width), y));
                }
            }
        }
        let mut best: Option<((f64, f64), (f64, f64), f64)> = None;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                if best.is_none_or(|b| d > b.2) {
                    best = Some((pts[i], pts[j], d));
                }
            }
        }
        match best {
            Some((p, q, d)) if d > 1e-6 => Some(LineSegment {
                x1: p.0,
                y1: p.1,
                x2: q.0,
                y2: q.1,
            }),
            _ => None,
        }
    }
}

/// Maps a line through a point homography: `l' ~ H^-T l`.
pub fn transfer_line(l: &HomogeneousLine, h: &Mat3) -> Result<HomogeneousLine> {
    let hit = h.inverse()?.transpose();
    let [a, b, c] = hit.apply(l.coefficients());
    HomogeneousLine::new(a, b, c).map_err(|_| Error::Singular)
}

/// Similarity of two segments in `[0, 1]`:
/// `(S_angle * S_dist)^2` with `S_angle = 1 - theta / (pi/2)` for the acute
/// angle between the segments and `S_dist = 1 - |m1 - m2| / diag` for the
/// midpoint distance relative to the image diagonal (floored at 0).
pub fn ea_score(l1: &LineSegment, l2: &LineSegment, width: usize, height: usize) -> Result<f64> {
    l1.validate()?;
    l2.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::invalid("image dimensions must be positive"));
    }
    let mut d = (l1.angle() - l2.angle()).abs();
    if d > FRAC_PI_2 {
        d = std::f64::consts::PI - d;
    }
    let s_angle = 1.0 - d.min(FRAC_PI_2) / FRAC_PI_2;
    let (m1, m2) = (l1.midpoint(), l2.midpoint());
    let diag = (width as f64).hypot(height as f64);
    let s_dist = (1.0 - (m1.0 - m2.0).hypot(m1.1 - m2.1) / diag).max(0.0);
    Ok((s_angle * s_dist).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ndc_to_camera_ray, pixel_to_ndc};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seg(x1: f64, y1: f64, x2: f64, y2: f64) -> LineSegment {
        LineSegment::new(x1, y1, x2, y2).unwrap()
    }

    /// Ray-rotate-reproject path, independent of the matrix route.
    fn reproject(
        x: f64,
        y: f64,
        fov_a: &FieldOfView,
        (wa, ha): (usize, usize),
        p_a: &EulerPose,
        fov_b: &FieldOfView,
        (wb, hb): (usize, usize),
        p_b: &EulerPose,
    ) -> Option<(f64, f64)> {
        let ray = ndc_to_camera_ray(pixel_to_ndc(x, y, wa, ha).unwrap(), fov_a);
        let world = p_a.rotation().apply(&ray);
        let cam = p_b.rotation().transpose().apply(&world);
        if cam.x <= 0.0 {
            return None;
        }
        let (tx, ty) = fov_b.half_tangents();
        let xn = cam.y / cam.x / tx;
        let yn = -cam.z / cam.x / ty;
        Some((wb as f64 * (1.0 + xn) / 2.0, hb as f64 * (1.0 + yn) / 2.0))
    }

    #[test]
    fn same_view_homography_is_identity() {
        let fov = FieldOfView::from_degrees(70.0, 50.0).unwrap();
        let k = Intrinsics::from_fov(&fov, 320, 240);
        let p = EulerPose::new(0.1, 0.2, 0.3).unwrap();
        let h = rotation_homography(&k, &p, &k, &p);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(h.0[i][j] / h.0[2][2], Mat3::IDENTITY.0[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ten_degree_yaw_shifts_centre_by_f_tan() {
        let k = Intrinsics {
            fx: 500.0,
            fy: 500.0,
            cx: 320.0,
            cy: 240.0,
        };
        let pb = EulerPose::from_degrees(0.0, 0.0, 10.0).unwrap();
        let h = rotation_homography(&k, &EulerPose::IDENTITY, &k, &pb);
        let (x, y) = h.transfer_point(320.0, 240.0).unwrap();
        assert_abs_diff_eq!((x - 320.0).abs(), 500.0 * 10f64.to_radians().tan(), epsilon = 1e-9);
        assert_abs_diff_eq!((x - 320.0).abs(), 88.16, epsilon = 0.01);
        // B looks further right, so A's centre appears left of B's centre
        assert!(x < 320.0);
        assert_abs_diff_eq!(y, 240.0, epsilon = 1e-9);
    }

    #[test]
    fn homography_matches_ray_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let fov_a = FieldOfView::from_degrees(rng.random_range(40.0..110.0), rng.random_range(40.0..100.0)).unwrap();
            let fov_b = FieldOfView::from_degrees(rng.random_range(40.0..110.0), rng.random_range(40.0..100.0)).unwrap();
            let pa = EulerPose::new(rng.random_range(-0.3..0.3), rng.random_range(-0.5..0.5), rng.random_range(-3.0..3.0)).unwrap();
            let pb = EulerPose::new(
                pa.roll() + rng.random_range(-0.2..0.2),
                pa.pitch() + rng.random_range(-0.2..0.2),
                pa.yaw() + rng.random_range(-0.5..0.5),
            )
            .unwrap();
            let (da, db) = ((400, 300), (256, 256));
            let h = rotation_homography(
                &Intrinsics::from_fov(&fov_a, da.0, da.1),
                &pa,
                &Intrinsics::from_fov(&fov_b, db.0, db.1),
                &pb,
            );
            for _ in 0..20 {
                let (x, y) = (rng.random_range(0.0..400.0), rng.random_range(0.0..300.0));
                let via_rays = reproject(x, y, &fov_a, da, &pa, &fov_b, db, &pb);
                let via_h = h.transfer_point(x, y);
                match (via_rays, via_h) {
                    (Some(p), Some(q)) => {
                        assert!((p.0 - q.0).abs() < 1e-6 && (p.1 - q.1).abs() < 1e-6, "{p:?} {q:?}");
                    }
                    (None, None) => {}
                    other => panic!("paths disagree on visibility: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn transfer_examples() {
        let l = HomogeneousLine::through(0.0, 0.0, 10.0, 5.0).unwrap();
        let same = transfer_line(&l, &Mat3::IDENTITY).unwrap();
        assert_abs_diff_eq!(same.a, l.a, epsilon = 1e-15);
        assert_abs_diff_eq!(same.c, l.c, epsilon = 1e-15);

        let t = Mat3([[1.0, 0.0, 7.0], [0.0, 1.0, -3.0], [0.0, 0.0, 1.0]]);
        let moved = transfer_line(&l, &t).unwrap();
        let sign = if moved.a * l.a < 0.0 { -1.0 } else { 1.0 };
        assert_abs_diff_eq!(sign * moved.a, l.a, epsilon = 1e-12);
        assert_abs_diff_eq!(sign * moved.b, l.b, epsilon = 1e-12);
        assert_abs_diff_eq!(moved.distance(7.0, -3.0), 0.0, epsilon = 1e-12);

        let singular = Mat3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(transfer_line(&l, &singular), Err(Error::Singular)));
    }

    #[test]
    fn transferred_line_agrees_with_fitted_points() {
        let fov = FieldOfView::from_degrees(90.0, 70.0).unwrap();
        let k = Intrinsics::from_fov(&fov, 320, 240);
        let pb = EulerPose::from_degrees(3.0, -5.0, 20.0).unwrap();
        let h = rotation_homography(&k, &EulerPose::IDENTITY, &k, &pb);
        let s = seg(40.0, 200.0, 300.0, 60.0);
        let moved = transfer_line(&s.line().unwrap(), &h).unwrap();
        // map 10 points along the segment and fit a line by total least squares
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let t = i as f64 / 9.0;
                h.transfer_point(s.x1 + t * (s.x2 - s.x1), s.y1 + t * (s.y2 - s.y1)).unwrap()
            })
            .collect();
        for &(x, y) in &pts {
            assert!(moved.distance(x, y).abs() < 1e-9);
        }
        let (a, b) = (pts[0], pts[9]);
        let fitted = seg(a.0, a.1, b.0, b.1);
        let analytic = moved.clip(320.0, 240.0).unwrap();
        let angle_only = {
            let mut d = (fitted.angle() - analytic.angle()).abs();
            if d > FRAC_PI_2 {
                d = std::f64::consts::PI - d;
            }
            (1.0 - d / FRAC_PI_2).powi(2)
        };
        assert!(angle_only >= 0.999);
    }

    #[test]
    fn ea_examples() {
        let a = seg(10.0, 10.0, 100.0, 60.0);
        assert_eq!(ea_score(&a, &a, 200, 100).unwrap(), 1.0);
        let h = seg(40.0, 50.0, 60.0, 50.0);
        let v = seg(50.0, 40.0, 50.0, 60.0);
        assert_eq!(ea_score(&h, &v, 200, 100).unwrap(), 0.0);
        // diag of 300x400 is 500; midpoints 250 apart
        let p = seg(0.0, 0.0, 100.0, 0.0);
        let q = seg(0.0, 250.0, 100.0, 250.0);
        assert_abs_diff_eq!(ea_score(&p, &q, 300, 400).unwrap(), 0.25, epsilon = 1e-12);
        assert!(LineSegment::new(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn ea_is_symmetric_and_endpoint_order_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let mut r = || rng.random_range(0.0..200.0);
            let a = seg(r(), r(), r(), r());
            let b = seg(r(), r(), r(), r());
            let ab = ea_score(&a, &b, 200, 200).unwrap();
            assert_eq!(ab, ea_score(&b, &a, 200, 200).unwrap());
            let flipped = seg(a.x2, a.y2, a.x1, a.y1);
            assert_eq!(ab, ea_score(&flipped, &b, 200, 200).unwrap());
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn clipping() {
        let l = HomogeneousLine::through(0.0, 50.0, 10.0, 50.0).unwrap();
        let s = l.clip(200.0, 100.0).unwrap();
        assert_abs_diff_eq!(s.length(), 200.0, epsilon = 1e-9);
        let outside = HomogeneousLine::through(0.0, 150.0, 10.0, 150.0).unwrap();
        assert!(outside.clip(200.0, 100.0).is_none());
        let diag = HomogeneousLine::through(0.0, 0.0, 1.0, 1.0).unwrap();
        let s = diag.clip(100.0, 100.0).unwrap();
        assert_abs_diff_eq!(s.length(), 100.0 * 2f64.sqrt(), epsilon = 1e-9);
    }
}
