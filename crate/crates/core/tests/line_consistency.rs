mod common;

use panokit::geometry::EulerPose;
use panokit::metrics::{line_consistency, transfer_line, HoughParams, Intrinsics, DEFAULT_MIN_SCORE};
use panokit::metrics::rotation_homography;

fn yaw(deg: f64) -> EulerPose {
    EulerPose::from_degrees(0.0, 0.0, deg).unwrap()
}

#[test]
fn self_consistency_scores_high() {
    let r = line_consistency(
        &common::scene_view(),
        &common::self_consistency_panorama(2),
        &[EulerPose::IDENTITY],
        &HoughParams::default(),
        DEFAULT_MIN_SCORE,
    )
    .unwrap();
    assert_eq!(r.matched, 6);
    assert!(r.mean >= 0.95, "{r:?}");
    assert!(r.penalized_mean >= 0.95);
}

#[test]
fn noise_panoramas_score_low() {
    let view = common::scene_view();
    let scores: Vec<f64> = (0..20)
        .map(|seed| {
            line_consistency(
                &view,
                &common::noise_panorama(seed),
                &[EulerPose::IDENTITY],
                &HoughParams::default(),
                DEFAULT_MIN_SCORE,
            )
            .unwrap()
            .mean
        })
        .collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    assert!(mean <= 0.3, "{scores:?}");
}

#[test]
fn great_circle_road_survives_thirty_degree_turns() {
    let r = line_consistency(
        &common::road_view(),
        &common::road_panorama(),
        &[yaw(30.0), yaw(-30.0)],
        &HoughParams::default(),
        DEFAULT_MIN_SCORE,
    )
    .unwrap();
    assert_eq!(r.ground_truth, 4);
    assert!(r.mean >= 0.8, "{r:?}");
}

#[test]
fn homography_transfer_matches_ray_traced_great_circles() {
    // the analytic image of each great circle in the neighbor view must
    // equal the annotation pushed through the homography
    let fov = common::view_fov();
    let k = Intrinsics::from_fov(&fov, common::VIEW_W, common::VIEW_H);
    for deg in [-30.0, -10.0, 15.0, 30.0] {
        let pb = EulerPose::from_degrees(3.0, -5.0, deg).unwrap();
        let h = rotation_homography(&k, &EulerPose::IDENTITY, &k, &pb);
        for n in common::road_normals() {
            let a = common::great_circle_in_view(&n, &EulerPose::IDENTITY, &fov, common::VIEW_W, common::VIEW_H);
            let b = common::great_circle_in_view(&n, &pb, &fov, common::VIEW_W, common::VIEW_H);
            let t = transfer_line(&a, &h).unwrap().coefficients();
            let b = b.coefficients();
            let sign = if t[0] * b[0] + t[1] * b[1] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..3 {
                assert!((sign * t[i] - b[i]).abs() < 1e-9, "{t:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn lines_behind_the_view_are_dropped() {
    let r = line_consistency(
        &common::scene_view(),
        &common::self_consistency_panorama(1),
        &[yaw(180.0)],
        &HoughParams::default(),
        DEFAULT_MIN_SCORE,
    )
    .unwrap();
    assert_eq!(r.matched, 0);
    assert_eq!(r.dropped + r.ground_truth, 3);
}
