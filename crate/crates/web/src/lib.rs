//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The page holds one [`Scene`]: a procedural panorama it can look around
//! in, plus helpers to simulate a handheld path and show which part of the
//! sphere a view covers. Angles cross the boundary in degrees; images cross
//! it as RGBA bytes ready for `ImageData`.

use panokit::camera_sim::{sample_params, simulate_trajectory, ParamRanges};
use panokit::geometry::{EulerPose, FieldOfView};
use panokit::projection::{project_to_equirect, unwrap_to_perspective};
use panokit::raster::{EquirectFrame, PerspectiveFrame, Raster, Rgb};
use panokit::synth::value_noise_panorama;
use wasm_bindgen::prelude::*;

fn js_err(e: panokit::Error) -> JsError {
    JsError::new(&format!("{}: {e}", e.kind()))
}

fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn to_rgba(pixels: &[Rgb]) -> Vec<u8> {
    pixels
        .iter()
        .flat_map(|p| [quantize(p[0]), quantize(p[1]), quantize(p[2]), 255])
        .collect()
}

#[wasm_bindgen]
pub struct Scene {
    pano: EquirectFrame,
}

#[wasm_bindgen]
impl Scene {
    /// A seam-continuous noise panorama of size `2 * height x height`.
    #[wasm_bindgen(constructor)]
    pub fn new(height: usize, seed: u64) -> Result<Scene, JsError> {
        let pano = value_noise_panorama(height, seed, 4).map_err(js_err)?;
        Ok(Scene { pano })
    }

    pub fn width(&self) -> usize {
        self.pano.width()
    }

    pub fn height(&self) -> usize {
        self.pano.height()
    }

    /// The panorama itself as RGBA.
    pub fn panorama(&self) -> Vec<u8> {
        to_rgba(self.pano.pixels())
    }

    /// The pinhole view at the given pose as RGBA, `w x h`.
    #[allow(clippy::too_many_arguments)]
    pub fn render(&self, yaw: f64, pitch: f64, roll: f64, hfov: f64, vfov: f64, w: usize, h: usize) -> Result<Vec<u8>, JsError> {
        let view = self.view(yaw, pitch, roll, hfov, vfov, w, h).map_err(js_err)?;
        Ok(to_rgba(view.pixels()))
    }

    /// The panorama with everything outside the view darkened.
    #[allow(clippy::too_many_arguments)]
    pub fn footprint(&self, yaw: f64, pitch: f64, roll: f64, hfov: f64, vfov: f64) -> Result<Vec<u8>, JsError> {
        footprint_of(&self.pano, yaw, pitch, roll, hfov, vfov).map_err(js_err)
    }
}

impl Scene {
    pub fn equirect(&self) -> &EquirectFrame {
        &self.pano
    }

    #[allow(clippy::too_many_arguments)]
    pub fn view(&self, yaw: f64, pitch: f64, roll: f64, hfov: f64, vfov: f64, w: usize, h: usize) -> panokit::Result<PerspectiveFrame> {
        let pose = EulerPose::from_degrees(roll, pitch, yaw)?;
        let fov = FieldOfView::from_degrees(hfov, vfov)?;
        unwrap_to_perspective(&self.pano, &pose, &fov, w, h)
    }
}

pub fn footprint_of(pano: &EquirectFrame, yaw: f64, pitch: f64, roll: f64, hfov: f64, vfov: f64) -> panokit::Result<Vec<u8>> {
    let pose = EulerPose::from_degrees(roll, pitch, yaw)?;
    let fov = FieldOfView::from_degrees(hfov, vfov)?;
    // only the mask is used, so any small blank view will do
    let probe = PerspectiveFrame::filled(8, 8, [0.0; 3])?;
    let mask = project_to_equirect(&probe, &pose, &fov, pano.height())?.into_parts().1;
    let dimmed: Vec<Rgb> = pano
        .pixels()
        .iter()
        .zip(&mask)
        .map(|(p, &inside)| if inside { *p } else { p.map(|v| v * 0.3) })
        .collect();
    Ok(to_rgba(&dimmed))
}

/// A simulated handheld path: `[yaw, pitch, roll]` in degrees per frame,
/// flattened, followed by the sampled `[hfov, vfov]`.
#[wasm_bindgen(js_name = simulateTrajectory)]
pub fn simulate_path(seed: u64, frames: usize) -> Result<Vec<f64>, JsError> {
    simulate_path_degrees(seed, frames).map_err(js_err)
}

pub fn simulate_path_degrees(seed: u64, frames: usize) -> panokit::Result<Vec<f64>> {
    let (params, fov) = sample_params(&ParamRanges::default(), seed)?;
    let poses = simulate_trajectory(&params, frames)?;
    let mut out: Vec<f64> = poses
        .iter()
        .flat_map(|p| [p.yaw().to_degrees(), p.pitch().to_degrees(), p.roll().to_degrees()])
        .collect();
    out.extend([fov.horizontal().to_degrees(), fov.vertical().to_degrees()]);
    Ok(out)
}
