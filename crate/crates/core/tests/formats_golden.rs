//! Golden files under `tests/data/golden` must survive read -> write
//! byte for byte. Set `PANOKIT_BLESS=1` to regenerate them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use panokit::camera_sim::{simulate_trajectory, MotionParams};
use panokit::filter::{ClipRecord, FilterConfig, Verdict};
use panokit::formats::{
    self, AnnotationFile, ClipManifest, CorpusEntry, CorpusManifest, Document, FovRecord, LabeledLine,
    RasterKind, TrajectoryFile, SCHEMA_VERSION,
};
use panokit::geometry::FieldOfView;
use panokit::projection::Trajectory;
use panokit::raster::{PerspectiveFrame, VideoClip, BLACK};
use panokit::Error;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden")
}

fn bless() -> bool {
    std::env::var_os("PANOKIT_BLESS").is_some()
}

fn motion() -> MotionParams {
    MotionParams {
        omega: 0.35,
        tau_r: 0.1,
        tau_p: 1.2,
        tau_y: -0.7,
        a_r: 0.02,
        a_p: 0.03,
        a_y: 0.05,
        eta_r: 0.002,
        eta_p: 0.003,
        eta_y: 0.004,
        d_p: 0.001,
        d_y: 0.02,
        phi_0: 0.3,
        seed: 7,
    }
}

fn trajectory() -> TrajectoryFile {
    let poses = simulate_trajectory(&motion(), 25).unwrap();
    let fov = FieldOfView::from_degrees(90.0, 60.0).unwrap();
    let t = Trajectory::new(poses, fov).unwrap();
    // Golden values are stored rounded, so compare against the rounded form.
    let raw = TrajectoryFile::from_trajectory(&t, Some(motion()));
    formats::parse_document(&formats::to_canonical(&raw).unwrap(), "rounded").unwrap()
}

// fov is stored pre-rounded to 9 significant digits
#[allow(clippy::approx_constant)]
fn manifest() -> ClipManifest {
    ClipManifest {
        version: SCHEMA_VERSION,
        kind: RasterKind::Perspective,
        width: 320,
        height: 240,
        frame_count: 25,
        fps: 30.0,
        frame_pattern: formats::DEFAULT_FRAME_PATTERN.to_string(),
        fov: Some(FovRecord {
            horizontal: 1.57079633,
            vertical: 1.04719755,
        }),
        trajectory: Some("trajectory.json".to_string()),
    }
}

fn annotations() -> AnnotationFile {
    AnnotationFile {
        version: SCHEMA_VERSION,
        image: "frame_00000.png".to_string(),
        width: 320,
        height: 240,
        lines: vec![
            LabeledLine {
                label: "horizon".to_string(),
                x1: 0.0,
                y1: 121.5,
                x2: 319.0,
                y2: 118.25,
            },
            LabeledLine {
                label: "pole".to_string(),
                x1: 200.0,
                y1: 20.0,
                x2: 201.5,
                y2: 230.0,
            },
        ],
    }
}

fn corpus() -> CorpusManifest {
    CorpusManifest {
        version: SCHEMA_VERSION,
        videos: vec![
            CorpusEntry {
                id: "beach".to_string(),
                path: "beach".to_string(),
                fps: 30.0,
                likes: Some(812),
            },
            CorpusEntry {
                id: "market".to_string(),
                path: "videos/market".to_string(),
                fps: 25.0,
                likes: None,
            },
        ],
    }
}

fn records() -> Vec<ClipRecord> {
    let v = |filter: &str, passed: bool, score: Option<f64>, details: &[(&str, f64)]| Verdict {
        filter: filter.to_string(),
        passed,
        score,
        details: details.iter().map(|(k, x)| (k.to_string(), *x)).collect::<BTreeMap<_, _>>(),
    };
    vec![
        ClipRecord {
            video: "beach".to_string(),
            clip: Some(0),
            start: 0,
            end: 300,
            fps: 30.0,
            likes: Some(812),
            verdicts: vec![
                v("likes", true, Some(812.0), &[]),
                v("motion", true, Some(2.75), &[("reliable_fraction", 0.875)]),
            ],
            accepted: true,
            rejected_by: None,
            error: None,
        },
        ClipRecord {
            video: "market".to_string(),
            clip: None,
            start: 0,
            end: 0,
            fps: 25.0,
            likes: None,
            verdicts: vec![],
            accepted: false,
            rejected_by: Some("io".to_string()),
            error: Some("frame_00003.png: unexpected end of file".to_string()),
        },
    ]
}

/// Writes (when blessing) then checks write(read(file)) == file.
fn check_roundtrip<T: Document + PartialEq + std::fmt::Debug>(name: &str, expected: &T) {
    let path = golden_dir().join(name);
    if bless() {
        expected.write(&path).unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = T::parse(&text, name).unwrap();
    assert_eq!(&doc, expected, "{name} content");
    assert_eq!(formats::to_canonical(&doc).unwrap(), text, "{name} bytes");

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join(name);
    doc.write(&out).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn trajectory_roundtrip() {
    let t = trajectory();
    assert_eq!(t.frames.len(), 25);
    check_roundtrip("trajectory.json", &t);
    let traj = t.to_trajectory().unwrap();
    assert_eq!(traj.len(), 25);
}

#[test]
fn manifest_roundtrip() {
    check_roundtrip("manifest.json", &manifest());
}

#[test]
fn annotation_roundtrip() {
    check_roundtrip("annotations.json", &annotations());
}

#[test]
fn corpus_roundtrip() {
    check_roundtrip("corpus.json", &corpus());
}

#[test]
fn filter_config_roundtrip() {
    check_roundtrip("filter_config.json", &FilterConfig::default());
}

#[test]
fn verdict_jsonl_roundtrip() {
    let path = golden_dir().join("verdicts.jsonl");
    if bless() {
        formats::write_atomic(&path, formats::to_jsonl(&records()).unwrap().as_bytes()).unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed: Vec<ClipRecord> = formats::parse_jsonl(&text, "verdicts.jsonl").unwrap();
    assert_eq!(parsed, records());
    assert_eq!(formats::to_jsonl(&parsed).unwrap(), text);
}

fn parse_err<T: Document + std::fmt::Debug>(text: &str) -> Error {
    T::parse(text, "input.json").unwrap_err()
}

#[test]
fn malformed_json_reports_position() {
    let text = "{\n  \"version\": 1,\n  \"videos\": [\n    {\"id\": \"a\" \"path\": \"a\"}\n  ]\n}\n";
    match parse_err::<CorpusManifest>(text) {
        Error::Parse { line, column, path, .. } => {
            assert_eq!(path, "input.json");
            assert_eq!(line, 4);
            assert!(column > 10, "column {column}");
        }
        e => panic!("expected a parse error, got {e:?}"),
    }
    let msg = parse_err::<CorpusManifest>(text).to_string();
    assert!(msg.contains("4:"), "{msg}");
}

#[test]
fn jsonl_error_names_line() {
    let mut text = formats::to_jsonl(&records()).unwrap();
    text.push_str("{\"video\": 3}\n");
    match formats::parse_jsonl::<ClipRecord>(&text, "v.jsonl").unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 3),
        e => panic!("{e:?}"),
    }
}

#[test]
fn unknown_field_rejected() {
    let text = "{\"version\": 1, \"videos\": [], \"extra\": true}";
    assert!(matches!(parse_err::<CorpusManifest>(text), Error::Parse { .. }));
}

#[test]
fn unknown_version_rejected() {
    let mut doc = serde_json::to_value(corpus()).unwrap();
    doc["version"] = 2.into();
    let err = parse_err::<CorpusManifest>(&doc.to_string());
    assert_eq!(err.kind(), "validation");
    assert!(err.to_string().contains("version"), "{err}");
}

#[test]
fn non_contiguous_indices_rejected() {
    let mut t = trajectory();
    t.frames.remove(7);
    let text = formats::to_canonical(&t).unwrap();
    let err = parse_err::<TrajectoryFile>(&text);
    assert_eq!(err.kind(), "validation");
    assert!(err.to_string().contains("frames[7]"), "{err}");
}

#[test]
fn out_of_bounds_annotation_rejected() {
    let mut a = annotations();
    a.lines[1].y2 = 400.0;
    let err = parse_err::<AnnotationFile>(&formats::to_canonical(&a).unwrap());
    assert!(err.to_string().contains("pole"), "{err}");
}

#[test]
fn missing_frame_named() {
    let dir = tempfile::tempdir().unwrap();
    let frames = (0..3)
        .map(|_| PerspectiveFrame::new(8, 8, vec![BLACK; 64]).unwrap())
        .collect();
    let clip = VideoClip::new(frames, 10.0).unwrap();
    let fov = FieldOfView::from_degrees(90.0, 70.0).unwrap();
    formats::write_perspective_clip(dir.path(), &clip, Some(fov), None).unwrap();
    formats::read_perspective_clip(dir.path()).unwrap();

    std::fs::remove_file(dir.path().join("frame_00001.png")).unwrap();
    let err = formats::read_perspective_clip(dir.path()).unwrap_err();
    assert!(err.to_string().contains("frame_00001.png"), "{err}");
}

#[test]
fn perspective_clip_roundtrip_is_lossless_at_8_bits() {
    let dir = tempfile::tempdir().unwrap();
    let rgb = (0..64)
        .map(|i| {
            let v = (i * 3) as f32 / 255.0;
            [v, 1.0 - v, 0.5]
        })
        .collect::<Vec<_>>();
    let frame = PerspectiveFrame::new(8, 8, rgb).unwrap();
    let clip = VideoClip::new(vec![frame.clone(), frame], 24.0).unwrap();
    let fov = FieldOfView::from_degrees(80.0, 60.0).unwrap();
    formats::write_perspective_clip(dir.path(), &clip, Some(fov), None).unwrap();
    let (m, back) = formats::read_perspective_clip(dir.path()).unwrap();
    assert_eq!(m.frame_count, 2);
    let png1 = formats::encode_perspective_png(&clip.frames()[0]).unwrap();
    let png2 = formats::encode_perspective_png(&back.frames()[0]).unwrap();
    assert_eq!(png1, png2);
}
