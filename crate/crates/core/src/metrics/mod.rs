//! Line consistency (homography transfer, Hough detection, assignment,
//! EA score) and masked PSNR.

pub mod assignment;
pub mod consistency;
pub mod hough;
pub mod lines;
pub mod psnr;

pub use assignment::max_weight_assignment;
pub use consistency::{
    line_consistency, match_lines, yaw_sweep_unwrap, AnnotatedView, ConsistencyReport, LineMatchReport,
    DEFAULT_MIN_SCORE,
};
pub use hough::{hough_detect, HoughParams};
pub use lines::{ea_score, rotation_homography, transfer_line, HomogeneousLine, Intrinsics, LineSegment, Mat3};
pub use psnr::{masked_psnr, masked_psnr_clip, PSNR_CAP_DB};
