//! Line matching, the line-consistency metric and the yaw-sweep renderer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EulerPose, FieldOfView};
use crate::metrics::assignment::max_weight_assignment;
use crate::metrics::hough::{hough_detect, HoughParams};
use crate::metrics::lines::{ea_score, rotation_homography, transfer_line, Intrinsics, LineSegment};
use crate::par;
use crate::projection::unwrap_to_perspective;
use crate::raster::{EquirectFrame, PerspectiveFrame, VideoClip};

pub const DEFAULT_MIN_SCORE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub gt: usize,
    pub det: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineMatchReport {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_gt: usize,
    pub unmatched_det: usize,
    /// Mean EA over kept pairs, 0 when nothing matched.
    pub mean: f64,
    /// Sum of kept scores over the number of ground-truth lines.
    pub penalized_mean: f64,
}

impl LineMatchReport {
    pub fn total(&self) -> f64 {
        self.pairs.iter().map(|p| p.score).sum()
    }
}

/// Optimal one-to-one pairing of ground-truth and detected segments by EA
/// score; pairs scoring below `min_score` are discarded afterwards.
pub fn match_lines(
    gt: &[LineSegment],
    det: &[LineSegment],
    min_score: f64,
    width: usize,
    height: usize,
) -> Result<LineMatchReport> {
    let scores = gt
        .iter()
        .map(|g| det.iter().map(|d| ea_score(g, d, width, height)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<MatchedPair> = if det.is_empty() {
        Vec::new()
    } else {
        max_weight_assignment(&scores)
            .into_iter()
            .map(|(i, j)| MatchedPair {
                gt: i,
                det: j,
                score: scores[i][j],
            })
            .filter(|p| p.score >= min_score)
            .collect()
    };
    let total: f64 = pairs.iter().map(|p| p.score).sum();
    Ok(LineMatchReport {
        unmatched_gt: gt.len() - pairs.len(),
        unmatched_det: det.len() - pairs.len(),
        mean: if pairs.is_empty() { 0.0 } else { total / pairs.len() as f64 },
        penalized_mean: if gt.is_empty() { 0.0 } else { total / gt.len() as f64 },
        pairs,
    })
}

/// A perspective view with line annotations in its pixel frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedView {
    pub width: usize,
    pub height: usize,
    pub fov: FieldOfView,
    /// Pose of the view in the panorama frame.
    pub pose: EulerPose,
    pub lines: Vec<LineSegment>,
}

/// Result for one neighbor pose of one panorama frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewReport {
    pub frame: usize,
    pub neighbor: usize,
    /// Annotations with no visible transfer in this view.
    pub dropped: usize,
    pub detected: usize,
    pub matches: LineMatchReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Mean EA over every kept pair of every view, 0 when nothing matched.
    pub mean: f64,
    /// Kept scores summed over every transferred ground-truth line.
    pub penalized_mean: f64,
    pub matched: usize,
    pub ground_truth: usize,
    pub dropped: usize,
    pub views: Vec<ViewReport>,
}

/// Annotation lines as seen from `pose_b`, clipped to its image; lines
/// with no visible part in front of the annotated view come back `None`.
pub fn transfer_annotations(
    view: &AnnotatedView,
    pose_b: &EulerPose,
    width_b: usize,
    height_b: usize,
) -> Result<Vec<Option<LineSegment>>> {
    let k_a = Intrinsics::from_fov(&view.fov, view.width, view.height);
    let k_b = Intrinsics::from_fov(&view.fov, width_b, height_b);
    let h = rotation_homography(&k_a, &view.pose, &k_b, pose_b);
    let back = h.inverse()?;
    view.lines
        .iter()
        .map(|seg| {
            let l = transfer_line(&seg.line()?, &h)?;
            Ok(l.clip(width_b as f64, height_b as f64).filter(|s| {
                let (mx, my) = s.midpoint();
                back.transfer_point(mx, my).is_some()
            }))
        })
        .collect()
}

/// Scores how well straight structure annotated in one view survives in a
/// generated panorama: every frame is unwrapped at every neighbor pose,
/// annotations are transferred analytically, detected with Hough and
/// matched by EA score.
pub fn line_consistency(
    view: &AnnotatedView,
    pano: &VideoClip<EquirectFrame>,
    neighbors: &[EulerPose],
    params: &HoughParams,
    min_score: f64,
) -> Result<ConsistencyReport> {
    if neighbors.is_empty() {
        return Err(Error::invalid("at least one neighbor pose is required"));
    }
    let (w, h) = (view.width, view.height);
    let jobs: Vec<(usize, usize)> = (0..pano.len())
        .flat_map(|f| (0..neighbors.len()).map(move |n| (f, n)))
        .collect();
    let views = par::map(&jobs, |&(f, n)| -> Result<ViewReport> {
        let pose = &neighbors[n];
        let rendered = unwrap_to_perspective(&pano.frames()[f], pose, &view.fov, w, h)?;
        let gt: Vec<LineSegment> = transfer_annotations(view, pose, w, h)?.into_iter().flatten().collect();
        let det = hough_detect(&rendered, params);
        Ok(ViewReport {
            frame: f,
            neighbor: n,
            dropped: view.lines.len() - gt.len(),
            detected: det.len(),
            matches: match_lines(&gt, &det, min_score, w, h)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let total: f64 = views.iter().map(|v| v.matches.total()).sum();
    let matched: usize = views.iter().map(|v| v.matches.pairs.len()).sum();
    let ground_truth: usize = views.iter().map(|v| v.matches.pairs.len() + v.matches.unmatched_gt).sum();
    Ok(ConsistencyReport {
        mean: if matched == 0 { 0.0 } else { total / matched as f64 },
        penalized_mean: if ground_truth == 0 { 0.0 } else { total / ground_truth as f64 },
        matched,
        ground_truth,
        dropped: views.iter().map(|v| v.dropped).sum(),
        views,
    })
}

/// Renders frame `k` of the clip at a yaw stepping linearly from
/// `from_yaw` to `to_yaw` (radians), returning the views and their poses.
pub fn yaw_sweep_unwrap(
    pano: &VideoClip<EquirectFrame>,
    from_yaw: f64,
    to_yaw: f64,
    fov: &FieldOfView,
    width: usize,
    height: usize,
) -> Result<(VideoClip<PerspectiveFrame>, Vec<EulerPose>)> {
    let n = pano.len();
    let poses = (0..n)
        .map(|k| {
            let t = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
            EulerPose::yaw_only(from_yaw + (to_yaw - from_yaw) * t)
        })
        .collect::<Result<Vec<_>>>()?;
    let frames = pano
        .frames()
        .iter()
        .zip(&poses)
        .map(|(f, p)| unwrap_to_perspective(f, p, fov, width, height))
        .collect::<Result<Vec<_>>>()?;
    Ok((VideoClip::new(frames, pano.fps())?, poses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::relative_pose;

    fn seg(x1: f64, y1: f64, x2: f64, y2: f64) -> LineSegment {
        LineSegment::new(x1, y1, x2, y2).unwrap()
    }

    #[test]
    fn identical_sets_match_fully() {
        let gt = vec![seg(0.0, 0.0, 100.0, 10.0), seg(20.0, 90.0, 30.0, 5.0)];
        let r = match_lines(&gt, &gt, DEFAULT_MIN_SCORE, 128, 128).unwrap();
        assert_eq!(r.pairs.len(), 2);
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.penalized_mean, 1.0);
    }

    #[test]
    fn no_detections_reports_zero() {
        let gt = vec![seg(0.0, 0.0, 100.0, 10.0)];
        let r = match_lines(&gt, &[], DEFAULT_MIN_SCORE, 128, 128).unwrap();
        assert_eq!((r.pairs.len(), r.mean, r.unmatched_gt), (0, 0.0, 1));
    }

    #[test]
    fn weak_pairs_are_dropped() {
        let gt = vec![seg(0.0, 0.0, 100.0, 0.0)];
        let det = vec![seg(50.0, -50.0, 50.0, 50.0)];
        let r = match_lines(&gt, &det, DEFAULT_MIN_SCORE, 128, 128).unwrap();
        assert!(r.pairs.is_empty());
        assert_eq!(r.unmatched_det, 1);
    }

    #[test]
    fn yaw_sweep_spacing_and_bookkeeping() {
        let pano = VideoClip::new(vec![EquirectFrame::filled(64, [0.5; 3]).unwrap(); 25], 8.0).unwrap();
        let fov = FieldOfView::from_degrees(90.0, 60.0).unwrap();
        let (clip, poses) =
            yaw_sweep_unwrap(&pano, 45f64.to_radians(), -45f64.to_radians(), &fov, 32, 24).unwrap();
        assert_eq!(clip.len(), 25);
        for k in 1..25 {
            let step = poses[k].yaw() - poses[k - 1].yaw();
            assert!((step - (-3.75f64).to_radians()).abs() < 1e-12);
            let rel = relative_pose(&poses[k], &poses[0]).pose;
            assert!(rel.roll().abs() < 1e-9 && rel.pitch().abs() < 1e-9);
            assert!((rel.yaw() - (poses[k].yaw() - poses[0].yaw())).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_sweep_is_constant_view() {
        let pano = VideoClip::new(
            (0..3)
                .map(|_| EquirectFrame::from_fn(64, |x, y| [x as f32 / 128.0, y as f32 / 64.0, 0.2]).unwrap())
                .collect(),
            8.0,
        )
        .unwrap();
        let fov = FieldOfView::from_degrees(60.0, 60.0).unwrap();
        let (clip, _) = yaw_sweep_unwrap(&pano, 0.0, 0.0, &fov, 16, 16).unwrap();
        assert_eq!(clip.frames()[0], clip.frames()[2]);
    }
}
