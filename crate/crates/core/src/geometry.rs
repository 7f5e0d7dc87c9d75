//! Angular and rotational math shared by every projection in the crate.
//!
//! Frames are right-handed with the camera looking down `+X`, `+Y` pointing
//! to the right of the image (increasing equirectangular column) and `+Z`
//! pointing up. With this labelling the identity pose looks at the centre of
//! the equirectangular map, and the elementary roll/pitch/yaw matrices below
//! are the textbook `Rx`, `Ry`, `Rz` composed as `yaw * pitch * roll`.
//!
//! A positive pitch tilts the optical axis *down* (latitude `-pitch`); the
//! sign is kept as the matrices define it rather than flipped.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into `[-pi, pi)`. Angles already in range are returned
/// unchanged (bit for bit).
pub fn wrap_angle(a: f64) -> f64 {
    if (-PI..PI).contains(&a) {
        return a;
    }
    let w = a - TAU * ((a + PI) / TAU).floor();
    // floor can land on the upper edge through rounding.
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Camera orientation as roll/pitch/yaw in radians, all wrapped to `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerPose {
    roll: f64,
    pitch: f64,
    yaw: f64,
}

impl Default for EulerPose {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl EulerPose {
    pub const IDENTITY: EulerPose = EulerPose {
        roll: 0.0,
        pitch: 0.0,
        yaw: 0.0,
    };

    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Result<Self> {
        if !(roll.is_finite() && pitch.is_finite() && yaw.is_finite()) {
            return Err(Error::invalid(format!(
                "pose angles must be finite (roll={roll}, pitch={pitch}, yaw={yaw})"
            )));
        }
        Ok(Self {
            roll: wrap_angle(roll),
            pitch: wrap_angle(pitch),
            yaw: wrap_angle(yaw),
        })
    }

    pub fn from_degrees(roll: f64, pitch: f64, yaw: f64) -> Result<Self> {
        Self::new(roll.to_radians(), pitch.to_radians(), yaw.to_radians())
    }

    pub fn yaw_only(yaw: f64) -> Result<Self> {
        Self::new(0.0, 0.0, yaw)
    }

    pub fn roll(&self) -> f64 {
        self.roll
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn rotation(&self) -> RotationMatrix {
        rotation_from_pose(self)
    }
}

/// Horizontal and vertical field of view in radians, each in `(0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldOfView {
    horizontal: f64,
    vertical: f64,
}

impl FieldOfView {
    pub fn new(horizontal: f64, vertical: f64) -> Result<Self> {
        let ok = |a: f64| a.is_finite() && a > 0.0 && a < PI;
        if !ok(horizontal) || !ok(vertical) {
            return Err(Error::invalid(format!(
                "field of view must lie in (0, pi): horizontal={horizontal}, vertical={vertical}"
            )));
        }
        Ok(Self {
            horizontal,
            vertical,
        })
    }

    pub fn from_degrees(horizontal: f64, vertical: f64) -> Result<Self> {
        Self::new(horizontal.to_radians(), vertical.to_radians())
    }

    pub fn horizontal(&self) -> f64 {
        self.horizontal
    }

    pub fn vertical(&self) -> f64 {
        self.vertical
    }

    /// `(tan(h/2), tan(v/2))`, the NDC-to-ray scale factors.
    pub fn half_tangents(&self) -> (f64, f64) {
        ((self.horizontal / 2.0).tan(), (self.vertical / 2.0).tan())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdcCoord {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Direction3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &Direction3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn normalized(&self) -> Result<Direction3> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Direction3::new(self.x / n, self.y / n, self.z / n))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// A 3x3 rotation, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(pub [[f64; 3]; 3]);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix =
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Rotation about the forward (`X`) axis.
    pub fn roll(r: f64) -> Self {
        let (s, c) = r.sin_cos();
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    /// Rotation about the right (`Y`) axis.
    pub fn pitch(p: f64) -> Self {
        let (s, c) = p.sin_cos();
        RotationMatrix([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    /// Rotation about the up (`Z`) axis.
    pub fn yaw(y: f64) -> Self {
        let (s, c) = y.sin_cos();
        RotationMatrix([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        RotationMatrix([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(&self, d: &Direction3) -> Direction3 {
        let m = &self.0;
        Direction3::new(
            m[0][0] * d.x + m[0][1] * d.y + m[0][2] * d.z,
            m[1][0] * d.x + m[1][1] * d.y + m[1][2] * d.z,
            m[2][0] * d.x + m[2][1] * d.y + m[2][2] * d.z,
        )
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &RotationMatrix) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        d
    }

    /// Euler factorization in the same `yaw * pitch * roll` order.
    ///
    /// Returns the pose and whether the factorization hit gimbal lock
    /// (`|pitch| = pi/2`), in which case roll is pinned to zero and the whole
    /// in-plane rotation is folded into yaw.
    pub fn to_euler(&self) -> (EulerPose, bool) {
        let m = &self.0;
        let sp = (-m[2][0]).clamp(-1.0, 1.0);
        let pitch = sp.asin();
        let cp = (m[2][1] * m[2][1] + m[2][2] * m[2][2]).sqrt();
        let (roll, yaw, locked) = if cp > 1e-9 {
            (m[2][1].atan2(m[2][2]), m[1][0].atan2(m[0][0]), false)
        } else {
            (0.0, (-m[0][1]).atan2(m[1][1]), true)
        };
        let pose = EulerPose {
            roll: wrap_angle(roll),
            pitch: wrap_angle(pitch),
            yaw: wrap_angle(yaw),
        };
        (pose, locked)
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        RotationMatrix(out)
    }
}

/// Longitude `theta` in `[-pi, pi)`, latitude `phi` in `[-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoord {
    pub theta: f64,
    pub phi: f64,
}

/// Continuous equirectangular pixel position; texel centres sit on integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquirectCoord {
    pub u: f64,
    pub v: f64,
}

pub fn pixel_to_ndc(u: f64, v: f64, width: usize, height: usize) -> Result<NdcCoord> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(NdcCoord {
        x: 2.0 * u / width as f64 - 1.0,
        y: 2.0 * v / height as f64 - 1.0,
    })
}

/// Unit ray through an NDC position, in the camera frame.
pub fn ndc_to_camera_ray(n: NdcCoord, fov: &FieldOfView) -> Direction3 {
    let (tx, ty) = fov.half_tangents();
    let (x, y, z) = (1.0, n.x * tx, -n.y * ty);
    let len = (x * x + y * y + z * z).sqrt();
    Direction3::new(x / len, y / len, z / len)
}

pub fn rotation_from_pose(p: &EulerPose) -> RotationMatrix {
    RotationMatrix::yaw(p.yaw) * RotationMatrix::pitch(p.pitch) * RotationMatrix::roll(p.roll)
}

pub fn dir_to_spherical(d: &Direction3) -> Result<SphericalCoord> {
    let n = d.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::invalid("direction must be a nonzero finite vector"));
    }
    Ok(spherical_unchecked(d, n))
}

#[inline]
pub(crate) fn spherical_unchecked(d: &Direction3, norm: f64) -> SphericalCoord {
    let mut theta = if d.x == 0.0 && d.y == 0.0 {
        0.0
    } else {
        d.y.atan2(d.x)
    };
    if theta >= PI {
        theta -= TAU;
    }
    let phi = (d.z / norm).clamp(-1.0, 1.0).asin();
    SphericalCoord { theta, phi }
}

fn check_equirect_dims(width: usize, height: usize) -> Result<()> {
    if height == 0 || width != 2 * height {
        return Err(Error::invalid(format!(
            "equirectangular maps must be 2:1, got {width}x{height}"
        )));
    }
    Ok(())
}

pub fn spherical_to_equirect(s: SphericalCoord, width: usize, height: usize) -> Result<EquirectCoord> {
    check_equirect_dims(width, height)?;
    Ok(spherical_to_equirect_unchecked(s, width as f64, height as f64))
}

#[inline]
pub(crate) fn spherical_to_equirect_unchecked(s: SphericalCoord, w: f64, h: f64) -> EquirectCoord {
    EquirectCoord {
        u: w / TAU * (s.theta + PI),
        v: h / PI * (FRAC_PI_2 - s.phi),
    }
}

pub fn equirect_to_dir(c: EquirectCoord, width: usize, height: usize) -> Result<Direction3> {
    check_equirect_dims(width, height)?;
    let (w, h) = (width as f64, height as f64);
    if !(c.u >= 0.0 && c.u < w && c.v >= 0.0 && c.v <= h) {
        return Err(Error::invalid(format!(
            "equirect coordinate ({}, {}) outside [0,{w})x[0,{h}]",
            c.u, c.v
        )));
    }
    let theta = c.u * TAU / w - PI;
    let phi = FRAC_PI_2 - c.v * PI / h;
    Ok(spherical_to_dir(theta, phi))
}

#[inline]
pub(crate) fn spherical_to_dir(theta: f64, phi: f64) -> Direction3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Direction3::new(cp * ct, cp * st, sp)
}

/// Orientation of `p_k` expressed in the frame of `p_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePose {
    pub pose: EulerPose,
    pub gimbal_locked: bool,
}

pub fn relative_pose(p_k: &EulerPose, p_0: &EulerPose) -> RelativePose {
    let r = rotation_from_pose(p_0).transpose() * rotation_from_pose(p_k);
    let (pose, gimbal_locked) = r.to_euler();
    RelativePose {
        pose,
        gimbal_locked,
    }
}
