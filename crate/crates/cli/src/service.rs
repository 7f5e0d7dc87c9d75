//! HTTP front end for the viewer/annotator.
//!
//! ```text
//! GET  /clips
//! GET  /clips/{id}/frames/{k}
//! GET  /clips/{id}/unwrap?frame&yaw&pitch&roll&hfov&vfov&w&h
//! GET  /clips/{id}/annotations
//! POST /clips/{id}/annotations
//! ```
//!
//! Every response carries `x-panokit-schema-version`. Clip directories are
//! never written; annotations live next to the manifest as
//! `annotations.json`. Writes to one clip are serialized and the last one
//! wins; each returns the new revision, also sent as
//! `x-panokit-revision` on reads.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{middleware, Router};
use panokit::formats::{self, AnnotationFile, ClipManifest, Document, RasterKind, SCHEMA_VERSION};
use panokit::Error;
use serde::Serialize;

use crate::ops::{self, ViewRequest};

pub const SCHEMA_HEADER: &str = "x-panokit-schema-version";
pub const REVISION_HEADER: &str = "x-panokit-revision";
pub const ANNOTATION_FILE: &str = "annotations.json";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: String,
    message: String,
}

impl ApiError {
    fn not_found(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            kind: "not-found".to_string(),
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) | Error::Validation(_) | Error::Parse { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    version: u32,
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    kind: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            version: SCHEMA_VERSION,
            error: ErrorDetail {
                kind: &self.kind,
                message: &self.message,
            },
        };
        json_response(self.status, &body)
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn json_response<T: Serialize>(status: StatusCode, doc: &T) -> Response {
    match formats::to_canonical(doc) {
        Ok(text) => (status, [(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

fn png_response(bytes: Vec<u8>) -> Response {
    (
        [
            (header::CONTENT_TYPE, "image/png"),
            (header::CACHE_CONTROL, "public, max-age=3600"),
        ],
        bytes,
    )
        .into_response()
}

#[derive(Default)]
struct AppState {
    root: PathBuf,
    /// Current annotation revision per clip; the mutex also serializes writes.
    revisions: Mutex<HashMap<String, Arc<Mutex<u64>>>>,
}

type Shared = Arc<AppState>;

pub fn router(root: PathBuf) -> Router {
    let state = Arc::new(AppState {
        root,
        ..AppState::default()
    });
    Router::new()
        .route("/clips", get(list_clips))
        .route("/clips/{id}/frames/{k}", get(get_frame))
        .route("/clips/{id}/unwrap", get(get_unwrap))
        .route("/clips/{id}/annotations", get(get_annotations).post(post_annotations))
        .layer(middleware::map_response(stamp_schema))
        .with_state(state)
}

async fn stamp_schema(mut res: Response) -> Response {
    res.headers_mut()
        .insert(SCHEMA_HEADER, HeaderValue::from(SCHEMA_VERSION));
    res
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        kind: "internal".to_string(),
        message: e.to_string(),
    })?
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// Resolves a clip id to its directory and manifest.
fn clip(root: &Path, id: &str) -> ApiResult<(PathBuf, ClipManifest)> {
    let dir = root.join(id);
    if !valid_id(id) || !dir.join(formats::MANIFEST_FILE).is_file() {
        return Err(ApiError::not_found(format!("no clip {id:?}")));
    }
    let m = ClipManifest::read(&dir.join(formats::MANIFEST_FILE))?;
    Ok((dir, m))
}

#[derive(Serialize)]
struct ClipSummary {
    id: String,
    kind: RasterKind,
    width: usize,
    height: usize,
    frame_count: usize,
    fps: f64,
}

#[derive(Serialize)]
struct InvalidClip {
    id: String,
    error: String,
}

#[derive(Serialize)]
struct ClipList {
    version: u32,
    clips: Vec<ClipSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    invalid: Vec<InvalidClip>,
}

fn scan(root: &Path) -> ApiResult<ClipList> {
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut ids: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join(formats::MANIFEST_FILE).is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|id| valid_id(id))
        .collect();
    ids.sort();
    let mut list = ClipList {
        version: SCHEMA_VERSION,
        clips: Vec::new(),
        invalid: Vec::new(),
    };
    for id in ids {
        match formats::read_clip_manifest(&root.join(&id)) {
            Ok(m) => list.clips.push(ClipSummary {
                id,
                kind: m.kind,
                width: m.width,
                height: m.height,
                frame_count: m.frame_count,
                fps: m.fps,
            }),
            Err(e) => list.invalid.push(InvalidClip { id, error: e.to_string() }),
        }
    }
    Ok(list)
}

async fn list_clips(State(s): State<Shared>) -> ApiResult<Response> {
    let list = blocking(move || scan(&s.root)).await?;
    Ok(json_response(StatusCode::OK, &list))
}

async fn get_frame(State(s): State<Shared>, UrlPath((id, k)): UrlPath<(String, usize)>) -> ApiResult<Response> {
    let bytes = blocking(move || {
        let (dir, m) = clip(&s.root, &id)?;
        if k >= m.frame_count {
            return Err(ApiError::not_found(format!("clip {id:?} has {} frames", m.frame_count)));
        }
        let p = m.frame_path(&dir, k)?;
        std::fs::read(&p).map_err(|e| Error::io(p, e).into())
    })
    .await?;
    Ok(png_response(bytes))
}

async fn get_unwrap(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    query: Result<Query<ViewRequest>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(req) = query.map_err(|e| ApiError::from(Error::validation(e.body_text())))?;
    let bytes = blocking(move || {
        let (dir, m) = clip(&s.root, &id)?;
        if req.frame >= m.frame_count {
            return Err(ApiError::not_found(format!("clip {id:?} has {} frames", m.frame_count)));
        }
        Ok(ops::unwrap_png(&dir, &req)?)
    })
    .await?;
    Ok(png_response(bytes))
}

impl AppState {
    fn revision_slot(&self, id: &str, dir: &Path) -> Arc<Mutex<u64>> {
        let mut map = self.revisions.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(id.to_string())
            .or_insert_with(|| Arc::new(Mutex::new(u64::from(dir.join(ANNOTATION_FILE).is_file()))))
            .clone()
    }
}

fn with_revision(mut res: Response, rev: u64) -> Response {
    res.headers_mut().insert(REVISION_HEADER, HeaderValue::from(rev));
    res
}

async fn get_annotations(State(s): State<Shared>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let (text, rev) = blocking(move || {
        let (dir, _) = clip(&s.root, &id)?;
        let slot = s.revision_slot(&id, &dir);
        let rev = slot.lock().unwrap_or_else(|e| e.into_inner());
        let path = dir.join(ANNOTATION_FILE);
        if !path.is_file() {
            return Err(ApiError::not_found(format!("clip {id:?} has no annotations")));
        }
        Ok((formats::read_text(&path)?, *rev))
    })
    .await?;
    let res = (StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], text).into_response();
    Ok(with_revision(res, rev))
}

#[derive(Serialize)]
struct Saved {
    version: u32,
    clip: String,
    revision: u64,
}

async fn post_annotations(State(s): State<Shared>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Response> {
    let saved = blocking(move || {
        let (dir, _) = clip(&s.root, &id)?;
        let text = std::str::from_utf8(&body).map_err(|e| Error::validation(format!("body is not UTF-8: {e}")))?;
        let doc = AnnotationFile::parse(text, "request body")?;
        let slot = s.revision_slot(&id, &dir);
        let mut rev = slot.lock().unwrap_or_else(|e| e.into_inner());
        doc.write(&dir.join(ANNOTATION_FILE))?;
        *rev += 1;
        Ok(Saved {
            version: SCHEMA_VERSION,
            clip: id,
            revision: *rev,
        })
    })
    .await?;
    let rev = saved.revision;
    Ok(with_revision(json_response(StatusCode::OK, &saved), rev))
}
