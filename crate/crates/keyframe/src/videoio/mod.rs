//! Probing, decoding and writing video frames.
//!
//! Decoding sits behind [`DecoderBackend`]. [`NativeDecoder`] reads PNG and
//! animated PNG directly; [`CommandDecoder`] shells out to an external tool
//! (ffprobe/ffmpeg by default) through configurable command templates.
//! [`AutoDecoder`] picks between them by sniffing the file signature.

mod command;
mod native;
mod write;

pub use command::{CommandDecoder, CommandTemplate, DEFAULT_EXTRACT_CMD, DEFAULT_PROBE_CMD};
pub use native::{write_apng, NativeDecoder};
pub use write::{
    frame_file_name, read_selection, write_selection, ApngEncoder, CommandEncoder, SelectionFile, SelectionStatus,
    VideoEncoder, WriteError, WrittenArtifacts, DEFAULT_ENCODE_CMD, SELECTION_FILE,
};

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use keyframe_core::Frame;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VideoMeta {
    pub frame_count: usize,
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    /// Size of the container on disk.
    pub byte_size: u64,
}

impl VideoMeta {
    pub fn timestamp(&self, index: usize) -> f64 {
        index as f64 / self.fps
    }
}

#[derive(Debug, Clone)]
pub struct CoarseFrameSet {
    /// Ascending by original index, no duplicates.
    pub frames: Vec<Frame>,
    pub source_meta: VideoMeta,
    pub cn_requested: usize,
}

impl CoarseFrameSet {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.index).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("decode {}: {message}", path.display())]
pub struct DecodeError {
    pub path: PathBuf,
    pub message: String,
}

impl DecodeError {
    pub fn new(path: &Path, message: impl Into<String>) -> Self {
        Self { path: path.to_path_buf(), message: message.into() }
    }
}

pub trait DecoderBackend: Send + Sync {
    fn probe(&self, path: &Path) -> Result<VideoMeta, DecodeError>;

    /// Returns the frames at `indices`, which the caller guarantees are
    /// strictly increasing and below `meta.frame_count`.
    fn extract(&self, path: &Path, meta: &VideoMeta, indices: &[usize]) -> Result<Vec<Frame>, DecodeError>;
}

/// Decodes exactly the frames at `indices`, checking the index contract first.
pub fn decode_frames(
    backend: &dyn DecoderBackend,
    path: &Path,
    meta: &VideoMeta,
    indices: &[usize],
    cn_requested: usize,
) -> Result<CoarseFrameSet, DecodeError> {
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DecodeError::new(path, "frame indices must be strictly increasing"));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= meta.frame_count) {
        return Err(DecodeError::new(
            path,
            format!("frame index {bad} out of range (frame_count {})", meta.frame_count),
        ));
    }
    let frames = if indices.is_empty() { Vec::new() } else { backend.extract(path, meta, indices)? };
    let got: Vec<usize> = frames.iter().map(|f| f.index).collect();
    if got != indices {
        return Err(DecodeError::new(path, format!("decoder returned {} of {} frames", got.len(), indices.len())));
    }
    Ok(CoarseFrameSet { frames, source_meta: *meta, cn_requested })
}

pub(crate) fn file_size(path: &Path) -> Result<u64, DecodeError> {
    std::fs::metadata(path).map(|m| m.len()).map_err(|e| DecodeError::new(path, e.to_string()))
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

pub(crate) fn is_png(path: &Path) -> Result<bool, DecodeError> {
    let mut head = [0u8; 8];
    let mut f = File::open(path).map_err(|e| DecodeError::new(path, e.to_string()))?;
    let n = f.read(&mut head).map_err(|e| DecodeError::new(path, e.to_string()))?;
    if n == 0 {
        return Err(DecodeError::new(path, "empty file"));
    }
    Ok(n == 8 && head == PNG_SIGNATURE)
}

/// PNG/APNG files go to the native decoder, everything else to the command decoder.
pub struct AutoDecoder {
    pub native: NativeDecoder,
    pub command: CommandDecoder,
}

impl AutoDecoder {
    pub fn new(command: CommandDecoder) -> Self {
        Self { native: NativeDecoder, command }
    }

    fn pick(&self, path: &Path) -> Result<&dyn DecoderBackend, DecodeError> {
        Ok(if is_png(path)? { &self.native } else { &self.command })
    }
}

impl Default for AutoDecoder {
    fn default() -> Self {
        Self::new(CommandDecoder::default())
    }
}

impl DecoderBackend for AutoDecoder {
    fn probe(&self, path: &Path) -> Result<VideoMeta, DecodeError> {
        self.pick(path)?.probe(path)
    }

    fn extract(&self, path: &Path, meta: &VideoMeta, indices: &[usize]) -> Result<Vec<Frame>, DecodeError> {
        self.pick(path)?.extract(path, meta, indices)
    }
}
