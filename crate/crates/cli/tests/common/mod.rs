#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use panokit::formats;
use panokit::raster::{circular_shift, VideoClip};
use panokit::synth::value_noise_panorama;

/// A three-frame panning equirect clip at 64x128 in `root/id`.
pub fn write_pano_clip(root: &Path, id: &str) -> PathBuf {
    let base = value_noise_panorama(64, 5, 4).unwrap();
    let frames = (0..3).map(|k| circular_shift(&base, 4 * k)).collect();
    let clip = VideoClip::new(frames, 10.0).unwrap();
    let dir = root.join(id);
    formats::write_equirect_clip(&dir, &clip, None, None).unwrap();
    dir
}

pub fn panokit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_panokit")).args(args).output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).trim().to_string()
}

pub fn corpus_manifest() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/corpus/corpus.json")
}
