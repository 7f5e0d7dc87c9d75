//! Geometry, blending, metrics and curation tools for 360-degree video.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: pixel/ray/sphere/equirect conversions and Euler poses
//! - [`raster`]: frame buffers, wrap-aware sampling, circular shifts
//! - [`projection`]: perspective <-> equirect resampling, clip alignment,
//!   long-clip window planning
//! - [`camera_sim`]: synthetic handheld trajectories
//! - [`blend`]: seam-blended decoding and latitude loss weights
//! - [`metrics`]: line consistency, Hough lines, assignment, masked PSNR
//! - [`filter`]: the dataset curation cascade
//! - [`formats`]: on-disk documents and frame sequences

pub mod blend;
pub mod camera_sim;
pub mod filter;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod metrics;
mod par;
pub mod projection;
pub mod raster;
pub mod synth;

pub use error::{Error, Result};
