//! Synthetic handheld camera motion: linear drift, a shared-frequency
//! oscillation and white Gaussian jitter per axis.
//!
//! ```text
//! roll(k)  = N(0, eta_r) + a_r sin(w k + tau_r)
//! pitch(k) = N(0, eta_p) + a_p sin(w k + tau_p) + d_p k
//! yaw(k)   = N(0, eta_y) + a_y sin(w k + tau_y) + d_y k + phi_0
//! ```
//!
//! Randomness comes from ChaCha20 seeded with a 64-bit value, which is
//! counter based and produces the same stream on every platform.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EulerPose, FieldOfView};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    /// Oscillation frequency, radians per frame.
    pub omega: f64,
    pub tau_r: f64,
    pub tau_p: f64,
    pub tau_y: f64,
    pub a_r: f64,
    pub a_p: f64,
    pub a_y: f64,
    pub eta_r: f64,
    pub eta_p: f64,
    pub eta_y: f64,
    /// Pitch drift, radians per frame.
    pub d_p: f64,
    /// Yaw drift, radians per frame.
    pub d_y: f64,
    pub phi_0: f64,
    pub seed: u64,
}

impl Default for MotionParams {
    /// A camera that never moves.
    fn default() -> Self {
        Self {
            omega: 0.0,
            tau_r: 0.0,
            tau_p: 0.0,
            tau_y: 0.0,
            a_r: 0.0,
            a_p: 0.0,
            a_y: 0.0,
            eta_r: 0.0,
            eta_p: 0.0,
            eta_y: 0.0,
            d_p: 0.0,
            d_y: 0.0,
            phi_0: 0.0,
            seed: 0,
        }
    }
}

impl MotionParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega, self.tau_r, self.tau_p, self.tau_y, self.a_r, self.a_p, self.a_y,
            self.eta_r, self.eta_p, self.eta_y, self.d_p, self.d_y, self.phi_0,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("motion parameters must be finite"));
        }
        let non_negative = [
            ("omega", self.omega),
            ("a_r", self.a_r),
            ("a_p", self.a_p),
            ("a_y", self.a_y),
            ("eta_r", self.eta_r),
            ("eta_p", self.eta_p),
            ("eta_y", self.eta_y),
        ];
        for (name, v) in non_negative {
            if v < 0.0 {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Generates `frames` poses. Identical inputs give bit-identical output.
pub fn simulate_trajectory(p: &MotionParams, frames: usize) -> Result<Vec<EulerPose>> {
    if frames == 0 {
        return Err(Error::invalid("trajectory length must be at least 1"));
    }
    p.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(p.seed);
    let mut gauss = move |std: f64| -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        std * z
    };
    (0..frames)
        .map(|k| {
            let k = k as f64;
            let phase = p.omega * k;
            let roll = gauss(p.eta_r) + p.a_r * (phase + p.tau_r).sin();
            let pitch = gauss(p.eta_p) + p.a_p * (phase + p.tau_p).sin() + p.d_p * k;
            let yaw = gauss(p.eta_y) + p.a_y * (phase + p.tau_y).sin() + p.d_y * k + p.phi_0;
            EulerPose::new(roll, pitch, yaw)
        })
        .collect()
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn degrees(lo: f64, hi: f64) -> Self {
        Self::new(lo.to_radians(), hi.to_radians())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        (self.lo + (self.hi - self.lo) * u).min(self.hi)
    }
}

/// Sampling ranges for every motion parameter plus the field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub omega: Interval,
    pub tau_r: Interval,
    pub tau_p: Interval,
    pub tau_y: Interval,
    pub a_r: Interval,
    pub a_p: Interval,
    pub a_y: Interval,
    pub eta_r: Interval,
    pub eta_p: Interval,
    pub eta_y: Interval,
    pub d_p: Interval,
    pub d_y: Interval,
    pub phi_0: Interval,
    /// Shared by the horizontal and vertical draws.
    pub fov: Interval,
}

pub const MIN_FOV_DEGREES: f64 = 30.0;
pub const MAX_FOV_DEGREES: f64 = 120.0;

impl Default for ParamRanges {
    fn default() -> Self {
        let phase = Interval::new(0.0, TAU);
        let amp = Interval::degrees(0.0, 5.0);
        let noise = Interval::degrees(0.0, 0.5);
        Self {
            omega: Interval::new(0.02, 0.2),
            tau_r: phase,
            tau_p: phase,
            tau_y: phase,
            a_r: amp,
            a_p: amp,
            a_y: amp,
            eta_r: noise,
            eta_p: noise,
            eta_y: noise,
            d_p: Interval::degrees(-0.2, 0.2),
            d_y: Interval::degrees(-1.0, 1.0),
            phi_0: Interval::new(-PI, PI),
            fov: Interval::degrees(MIN_FOV_DEGREES, MAX_FOV_DEGREES),
        }
    }
}

impl ParamRanges {
    fn fields(&self) -> [(&'static str, Interval); 14] {
        [
            ("omega", self.omega),
            ("tau_r", self.tau_r),
            ("tau_p", self.tau_p),
            ("tau_y", self.tau_y),
            ("a_r", self.a_r),
            ("a_p", self.a_p),
            ("a_y", self.a_y),
            ("eta_r", self.eta_r),
            ("eta_p", self.eta_p),
            ("eta_y", self.eta_y),
            ("d_p", self.d_p),
            ("d_y", self.d_y),
            ("phi_0", self.phi_0),
            ("fov", self.fov),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, iv) in self.fields() {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
                return Err(Error::invalid(format!(
                    "range {name} = [{}, {}] is empty or not finite",
                    iv.lo, iv.hi
                )));
            }
        }
        for (name, iv) in &self.fields()[..10] {
            if *name != "tau_r" && *name != "tau_p" && *name != "tau_y" && iv.lo < 0.0 {
                return Err(Error::invalid(format!("range {name} must be non-negative")));
            }
        }
        let (lo, hi) = (MIN_FOV_DEGREES.to_radians(), MAX_FOV_DEGREES.to_radians());
        if self.fov.lo < lo || self.fov.hi > hi {
            return Err(Error::invalid(format!(
                "fov range must lie within [{MIN_FOV_DEGREES}, {MAX_FOV_DEGREES}] degrees"
            )));
        }
        Ok(())
    }
}

/// Draws one parameter set and field of view, uniformly per field.
pub fn sample_params(ranges: &ParamRanges, seed: u64) -> Result<(MotionParams, FieldOfView)> {
    ranges.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let r = ranges;
    let params = MotionParams {
        omega: r.omega.draw(&mut rng),
        tau_r: r.tau_r.draw(&mut rng),
        tau_p: r.tau_p.draw(&mut rng),
        tau_y: r.tau_y.draw(&mut rng),
        a_r: r.a_r.draw(&mut rng),
        a_p: r.a_p.draw(&mut rng),
        a_y: r.a_y.draw(&mut rng),
        eta_r: r.eta_r.draw(&mut rng),
        eta_p: r.eta_p.draw(&mut rng),
        eta_y: r.eta_y.draw(&mut rng),
        d_p: r.d_p.draw(&mut rng),
        d_y: r.d_y.draw(&mut rng),
        phi_0: r.phi_0.draw(&mut rng),
        seed: rng.random(),
    };
    let fov = FieldOfView::new(r.fov.draw(&mut rng), r.fov.draw(&mut rng))?;
    Ok((params, fov))
}
