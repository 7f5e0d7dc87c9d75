mod common;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use panokit::formats::{self, AnnotationFile, LabeledLine};
use panokit_cli::ops::{unwrap_png, ViewRequest};
use panokit_cli::service::{router, REVISION_HEADER, SCHEMA_HEADER};
use serde_json::Value;
use tower::ServiceExt;

struct Reply {
    status: StatusCode,
    schema: Option<String>,
    revision: Option<u64>,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

async fn send(app: &Router, method: Method, uri: &str, body: Option<String>) -> Reply {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(body.map(Body::from).unwrap_or_default())
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let (schema, revision) = {
        let header = |name: &str| res.headers().get(name).map(|v| v.to_str().unwrap().to_string());
        (header(SCHEMA_HEADER), header(REVISION_HEADER).map(|v| v.parse().unwrap()))
    };
    Reply {
        status: res.status(),
        schema,
        revision,
        body: res.into_body().collect().await.unwrap().to_bytes().to_vec(),
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Method::GET, uri, None).await
}

fn annotation(label: &str) -> AnnotationFile {
    AnnotationFile {
        version: 1,
        image: "view.png".into(),
        width: 320,
        height: 240,
        lines: vec![LabeledLine {
            label: label.into(),
            x1: 10.0,
            y1: 20.5,
            x2: 300.0,
            y2: 200.25,
        }],
    }
}

#[tokio::test]
async fn empty_root_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(dir.path().to_path_buf());
    let r = get(&app, "/clips").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.schema.as_deref(), Some("1"));
    assert_eq!(r.json(), serde_json::json!({"clips": [], "version": 1}));
}

#[tokio::test]
async fn lists_clips_and_serves_frames() {
    let dir = tempfile::tempdir().unwrap();
    let clip = common::write_pano_clip(dir.path(), "alpha");
    std::fs::create_dir(dir.path().join("not-a-clip")).unwrap();
    let app = router(dir.path().to_path_buf());

    let list = get(&app, "/clips").await.json();
    assert_eq!(list["clips"].as_array().unwrap().len(), 1);
    assert_eq!(list["clips"][0]["id"], "alpha");
    assert_eq!(list["clips"][0]["kind"], "equirect");
    assert_eq!(list["clips"][0]["frame_count"], 3);

    let r = get(&app, "/clips/alpha/frames/1").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, std::fs::read(clip.join("frame_00001.png")).unwrap());

    for uri in ["/clips/alpha/frames/3", "/clips/beta/frames/0", "/clips/..%2Falpha/frames/0"] {
        let r = get(&app, uri).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(r.schema.as_deref(), Some("1"));
        assert_eq!(r.json()["error"]["kind"], "not-found");
    }
}

#[tokio::test]
async fn unwrap_matches_cli_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let clip = common::write_pano_clip(dir.path(), "alpha");
    let app = router(dir.path().to_path_buf());

    let r = get(&app, "/clips/alpha/unwrap?frame=0&yaw=0&pitch=0&roll=0&hfov=90&vfov=60&w=80&h=60").await;
    assert_eq!(r.status, StatusCode::OK);
    let out = dir.path().join("view.png");
    let o = common::panokit(&[
        "unwrap", "--in", clip.to_str().unwrap(), "--frame", "0", "--hfov", "90", "--vfov", "60", "--width", "80",
        "--height", "60", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", common::stderr(&o));
    assert_eq!(r.body, std::fs::read(&out).unwrap());

    let req = ViewRequest {
        frame: 2,
        yaw: -35.0,
        pitch: 12.5,
        roll: 3.0,
        hfov: 100.0,
        vfov: 70.0,
        w: 64,
        h: 48,
    };
    let r = get(&app, "/clips/alpha/unwrap?frame=2&yaw=-35&pitch=12.5&roll=3&hfov=100&vfov=70&w=64&h=48").await;
    assert_eq!(r.body, unwrap_png(&clip, &req).unwrap());
}

#[tokio::test]
async fn unwrap_rejects_bad_views() {
    let dir = tempfile::tempdir().unwrap();
    common::write_pano_clip(dir.path(), "alpha");
    let app = router(dir.path().to_path_buf());
    let r = get(&app, "/clips/alpha/unwrap?hfov=200").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["kind"], "invalid-argument");
    let r = get(&app, "/clips/alpha/unwrap?yaw=left").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["kind"], "validation");
    let r = get(&app, "/clips/alpha/unwrap?frame=9").await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn annotation_roundtrip_and_revisions() {
    let dir = tempfile::tempdir().unwrap();
    let clip = common::write_pano_clip(dir.path(), "alpha");
    let before: Vec<_> = std::fs::read_dir(&clip).unwrap().map(|e| e.unwrap().file_name()).collect();
    let app = router(dir.path().to_path_buf());

    assert_eq!(get(&app, "/clips/alpha/annotations").await.status, StatusCode::NOT_FOUND);

    let doc = annotation("horizon");
    let posted = formats::to_canonical(&doc).unwrap();
    let r = send(&app, Method::POST, "/clips/alpha/annotations", Some(posted.clone())).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["revision"], 1);

    let r = get(&app, "/clips/alpha/annotations").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.revision, Some(1));
    assert_eq!(String::from_utf8(r.body).unwrap(), posted);

    // non-canonical input is stored canonically
    let compact = serde_json::to_string(&annotation("pole")).unwrap();
    let r = send(&app, Method::POST, "/clips/alpha/annotations", Some(compact)).await;
    assert_eq!(r.revision, Some(2));
    let r = get(&app, "/clips/alpha/annotations").await;
    assert_eq!(String::from_utf8(r.body).unwrap(), formats::to_canonical(&annotation("pole")).unwrap());

    // only annotations.json was added to the clip directory
    let after: Vec<_> = std::fs::read_dir(&clip).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(after.len(), before.len() + 1);
}

#[tokio::test]
async fn invalid_annotations_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    common::write_pano_clip(dir.path(), "alpha");
    let app = router(dir.path().to_path_buf());

    let mut off = annotation("x");
    off.lines[0].x2 = 900.0;
    let r = send(&app, Method::POST, "/clips/alpha/annotations", Some(serde_json::to_string(&off).unwrap())).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["kind"], "validation");

    let r = send(&app, Method::POST, "/clips/alpha/annotations", Some("{\n\"version\": 1,\n oops".into())).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["kind"], "parse");

    let r = send(&app, Method::POST, "/clips/nope/annotations", Some(formats::to_canonical(&annotation("x")).unwrap())).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/clips/alpha/annotations").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writes_serialize() {
    let dir = tempfile::tempdir().unwrap();
    common::write_pano_clip(dir.path(), "alpha");
    let app = router(dir.path().to_path_buf());
    let tasks: Vec<_> = (0..8)
        .map(|i| {
            let app = app.clone();
            tokio::spawn(async move {
                let body = formats::to_canonical(&annotation(&format!("line{i}"))).unwrap();
                send(&app, Method::POST, "/clips/alpha/annotations", Some(body)).await.revision.unwrap()
            })
        })
        .collect();
    let mut revs = Vec::new();
    for t in tasks {
        revs.push(t.await.unwrap());
    }
    revs.sort();
    assert_eq!(revs, (1..=8).collect::<Vec<u64>>());

    let r = get(&app, "/clips/alpha/annotations").await;
    assert_eq!(r.revision, Some(8));
    let stored: AnnotationFile = formats::parse_document(std::str::from_utf8(&r.body).unwrap(), "stored").unwrap();
    assert!(stored.lines[0].label.starts_with("line"));
}
