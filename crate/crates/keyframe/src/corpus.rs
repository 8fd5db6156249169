//! Synthetic planted-frame corpora.
//!
//! Each video is a run of solid distractor-colored frames with a known set
//! of frames in the planted color; the manifest's question and answer name
//! only the planted color, so a color-aware provider can find exactly those
//! frames. `ground_truth.json` records the planted indices.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use keyframe_core::mock::keyword_rgb;
use keyframe_core::rng::{derive_seed, SplitMix64};
use keyframe_core::Frame;
use serde::{Deserialize, Serialize};

use crate::manifest::{write_manifest, ManifestEntry};
use crate::videoio::write_apng;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub n_videos: usize,
    pub fps: f64,
    pub duration_s: f64,
    pub width: u32,
    pub height: u32,
    pub planted_color: String,
    pub distractor_color: String,
    /// Same planted frames in every video. When `None`, each video draws
    /// `planted_count` distinct positions from the seeded generator.
    pub planted_positions: Option<Vec<usize>>,
    pub planted_count: usize,
    /// Per-channel uniform pixel noise amplitude, 0 for flat frames.
    pub noise: u8,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_videos: 10,
            fps: 24.0,
            duration_s: 2.0,
            width: 64,
            height: 64,
            planted_color: "red".into(),
            distractor_color: "blue".into(),
            planted_positions: None,
            planted_count: 8,
            noise: 0,
        }
    }
}

impl CorpusSpec {
    pub fn frame_count(&self) -> usize {
        (self.fps * self.duration_s).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub video_id: String,
    pub video: String,
    pub frame_count: usize,
    pub planted: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: PathBuf,
    pub ground_truth: PathBuf,
    pub videos: Vec<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid corpus spec: {0}")]
    Invalid(String),
    #[error("encode: {0}")]
    Encode(String),
    #[error("io: {0}")]
    Io(String),
}

fn color(name: &str) -> Result<[u8; 3], CorpusError> {
    keyword_rgb(name).ok_or_else(|| CorpusError::Invalid(format!("{name:?} is not a known color keyword")))
}

fn validate_positions(positions: &[usize], frame_count: usize) -> Result<(), CorpusError> {
    let unique: BTreeSet<usize> = positions.iter().copied().collect();
    if unique.len() != positions.len() {
        return Err(CorpusError::Invalid("duplicate planted positions".into()));
    }
    if let Some(p) = positions.iter().find(|&&p| p >= frame_count) {
        return Err(CorpusError::Invalid(format!("planted position {p} >= frame count {frame_count}")));
    }
    Ok(())
}

fn paint(index: usize, fps: f64, w: u32, h: u32, rgb: [u8; 3], noise: u8, rng: &mut SplitMix64) -> Frame {
    let mut f = Frame::solid(index, index as f64 / fps, w, h, rgb);
    if noise > 0 {
        let span = 2 * noise as u64 + 1;
        for px in &mut f.pixels {
            let delta = rng.below(span) as i16 - noise as i16;
            *px = (*px as i16 + delta).clamp(0, 255) as u8;
        }
    }
    f
}

pub fn gen_corpus(spec: &CorpusSpec, out_dir: &Path, seed: u64) -> Result<Corpus, CorpusError> {
    let planted_rgb = color(&spec.planted_color)?;
    let distractor_rgb = color(&spec.distractor_color)?;
    if planted_rgb == distractor_rgb {
        return Err(CorpusError::Invalid("planted and distractor colors are identical".into()));
    }
    if !(spec.fps.is_finite() && spec.fps > 0.0) || spec.width == 0 || spec.height == 0 {
        return Err(CorpusError::Invalid("fps and frame size must be positive".into()));
    }
    let frame_count = spec.frame_count();
    if frame_count == 0 {
        return Err(CorpusError::Invalid("duration yields no frames".into()));
    }
    if let Some(p) = &spec.planted_positions {
        validate_positions(p, frame_count)?;
    } else if spec.planted_count > frame_count {
        return Err(CorpusError::Invalid(format!("cannot plant {} of {frame_count} frames", spec.planted_count)));
    }

    let io = |e: std::io::Error| CorpusError::Io(e.to_string());
    let video_dir = out_dir.join("videos");
    fs::create_dir_all(&video_dir).map_err(io)?;
    let pc = &spec.planted_color;
    let mut entries = Vec::with_capacity(spec.n_videos);
    let mut truth = Vec::with_capacity(spec.n_videos);
    for v in 0..spec.n_videos {
        let video_id = format!("vid{v:04}");
        let mut rng = SplitMix64::new(derive_seed(seed, &video_id));
        let planted: Vec<usize> = match &spec.planted_positions {
            Some(p) => {
                let mut p = p.clone();
                p.sort_unstable();
                p
            }
            None => keyframe_core::strategy::random_positions(frame_count, spec.planted_count, rng.next_u64()),
        };
        let frames: Vec<Frame> = (0..frame_count)
            .map(|i| {
                let rgb = if planted.binary_search(&i).is_ok() { planted_rgb } else { distractor_rgb };
                paint(i, spec.fps, spec.width, spec.height, rgb, spec.noise, &mut rng)
            })
            .collect();
        let rel = format!("videos/{video_id}.apng");
        write_apng(&out_dir.join(&rel), &frames, spec.fps).map_err(CorpusError::Encode)?;
        entries.push(ManifestEntry {
            video_id: video_id.clone(),
            video_path: PathBuf::from(&rel),
            question: format!("What is {pc} in this clip?"),
            answer: format!("The {pc} object appears in a few frames."),
            job_key: format!("{video_id}#0"),
        });
        truth.push(GroundTruth { video_id, video: rel, frame_count, planted });
    }

    let manifest = out_dir.join(MANIFEST_FILE);
    let mut buf = Vec::new();
    write_manifest(&entries, &mut buf).map_err(io)?;
    fs::write(&manifest, buf).map_err(io)?;
    let ground_truth = out_dir.join(GROUND_TRUTH_FILE);
    let body = serde_json::to_vec_pretty(&truth).map_err(|e| CorpusError::Io(e.to_string()))?;
    fs::write(&ground_truth, body).map_err(io)?;
    Ok(Corpus { manifest, ground_truth, videos: truth })
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruth>, CorpusError> {
    let bytes = fs::read(path).map_err(|e| CorpusError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CorpusError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::read_manifest;
    use crate::videoio::{DecoderBackend, NativeDecoder};

    #[test]
    fn empty_corpus_has_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let c = gen_corpus(&CorpusSpec { n_videos: 0, ..Default::default() }, dir.path(), 1).unwrap();
        assert!(read_manifest(&c.manifest).unwrap().is_empty());
        assert!(c.videos.is_empty());
    }

    #[test]
    fn duplicate_positions_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CorpusSpec { planted_positions: Some(vec![1, 1]), ..Default::default() };
        assert_eq!(
            gen_corpus(&spec, dir.path(), 0).unwrap_err(),
            CorpusError::Invalid("duplicate planted positions".into())
        );
        let spec = CorpusSpec { planted_positions: Some(vec![48]), ..Default::default() };
        assert!(gen_corpus(&spec, dir.path(), 0).is_err());
        let spec = CorpusSpec { planted_color: "purple".into(), ..Default::default() };
        assert!(gen_corpus(&spec, dir.path(), 0).is_err());
    }

    #[test]
    fn planted_frames_decode_in_planted_color() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CorpusSpec {
            n_videos: 1,
            width: 8,
            height: 8,
            planted_positions: Some(vec![3, 7, 11, 15, 19, 23, 27, 31]),
            ..Default::default()
        };
        let c = gen_corpus(&spec, dir.path(), 5).unwrap();
        let entries = read_manifest(&c.manifest).unwrap();
        assert!(entries[0].question.contains("red") && entries[0].answer.contains("red"));
        let meta = NativeDecoder.probe(&entries[0].video_path).unwrap();
        assert_eq!((meta.frame_count, meta.fps), (48, 24.0));
        let all: Vec<usize> = (0..48).collect();
        let frames = NativeDecoder.extract(&entries[0].video_path, &meta, &all).unwrap();
        let red: Vec<usize> = frames.iter().filter(|f| f.pixels[..3] == [255, 0, 0]).map(|f| f.index).collect();
        assert_eq!(red, c.videos[0].planted);
        assert_eq!(read_ground_truth(&c.ground_truth).unwrap(), c.videos);
    }

    #[test]
    fn random_plants_are_seeded() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let spec = CorpusSpec { n_videos: 3, width: 4, height: 4, ..Default::default() };
        let ca = gen_corpus(&spec, a.path(), 42).unwrap();
        let cb = gen_corpus(&spec, b.path(), 42).unwrap();
        assert_eq!(ca.videos, cb.videos);
        assert!(ca.videos.iter().all(|v| v.planted.len() == 8));
        assert_eq!(
            fs::read(a.path().join("videos/vid0001.apng")).unwrap(),
            fs::read(b.path().join("videos/vid0001.apng")).unwrap()
        );
    }
}
