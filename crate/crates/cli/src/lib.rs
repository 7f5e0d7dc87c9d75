//! Command line and HTTP service over the panokit library.

pub mod commands;
pub mod ops;
pub mod service;

/// The single-line error report printed on failure.
pub fn error_line(e: &panokit::Error) -> String {
    let msg = serde_json::to_string(&e.to_string()).unwrap_or_else(|_| "\"?\"".to_string());
    format!("error: kind={} message={msg}", e.kind())
}
