//! Writing selected keyframes, their `selection.json`, and an optional
//! reassembled clip.
//!
//! A job directory is populated in a sibling staging directory and renamed
//! into place, so it either holds a complete `selection.json` or does not
//! exist.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::ImageEncoder;
use keyframe_core::Frame;
use serde::{Deserialize, Serialize};

use super::command::CommandTemplate;
use super::native::write_apng;

pub const SELECTION_FILE: &str = "selection.json";

pub const DEFAULT_ENCODE_CMD: &str = "ffmpeg -v error -y -framerate {fps} -i {pattern} \
     -vf pad=ceil(iw/2)*2:ceil(ih/2)*2 -c:v libx264 -pix_fmt yuv420p {output}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionStatus {
    Ok,
    Failed,
}

/// On-disk record of one job. The leading fields are the public schema;
/// the trailing ones let `keyframe report` rebuild a run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFile {
    pub video_id: String,
    pub mode: Option<String>,
    pub selector: String,
    pub k: usize,
    pub cn: usize,
    pub frame_count: usize,
    pub indices: Vec<usize>,
    pub timestamps: Vec<f64>,
    pub scores: Vec<Option<f64>>,
    pub status: SelectionStatus,
    pub error: Option<String>,
    #[serde(default)]
    pub job_key: String,
    #[serde(default)]
    pub job_index: usize,
    #[serde(default)]
    pub orig_bytes: u64,
    #[serde(default)]
    pub wall_time: f64,
    #[serde(default)]
    pub select_time: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WriteError {
    #[error("write {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("encode: {0}")]
    Encode(String),
    #[error("frames must be in ascending index order")]
    Unordered,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> WriteError + '_ {
    move |e| WriteError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Produces a clip from the frames already written as PNGs.
pub trait VideoEncoder: Send + Sync {
    fn file_name(&self) -> &str;

    fn encode(&self, pngs: &[PathBuf], frames: &[Frame], fps: f64, output: &Path) -> Result<(), String>;
}

/// Runs an external encoder. Frames are hard-linked (or copied) into a
/// contiguous `%06d.png` sequence first; the template sees `{pattern}`,
/// `{frames_dir}`, `{fps}`, `{count}` and `{output}`.
#[derive(Debug, Clone)]
pub struct CommandEncoder {
    pub template: CommandTemplate,
    pub file_name: String,
}

impl Default for CommandEncoder {
    fn default() -> Self {
        Self {
            template: CommandTemplate::new(DEFAULT_ENCODE_CMD).expect("default encode template"),
            file_name: "keyframes.mp4".into(),
        }
    }
}

impl VideoEncoder for CommandEncoder {
    fn file_name(&self) -> &str {
        &self.file_name
    }

    fn encode(&self, pngs: &[PathBuf], _frames: &[Frame], fps: f64, output: &Path) -> Result<(), String> {
        let seq = output.with_file_name(".sequence");
        fs::create_dir_all(&seq).map_err(|e| e.to_string())?;
        let result = (|| {
            for (i, png) in pngs.iter().enumerate() {
                let link = seq.join(format!("{i:06}.png"));
                if fs::hard_link(png, &link).is_err() {
                    fs::copy(png, &link).map_err(|e| e.to_string())?;
                }
            }
            let pattern = seq.join("%06d.png");
            let vars = [
                ("pattern", pattern.to_string_lossy().into_owned()),
                ("frames_dir", seq.to_string_lossy().into_owned()),
                ("fps", fps.to_string()),
                ("count", pngs.len().to_string()),
                ("output", output.to_string_lossy().into_owned()),
            ];
            let vars: Vec<(&str, &str)> = vars.iter().map(|(k, v)| (*k, v.as_str())).collect();
            self.template.run(&vars)?;
            if !output.is_file() {
                return Err(format!("encoder did not produce {}", output.display()));
            }
            Ok(())
        })();
        let _ = fs::remove_dir_all(&seq);
        result
    }
}

/// Writes the clip as an animated PNG, no external tools needed.
#[derive(Debug, Clone, Copy, Default)]
pub struct ApngEncoder;

impl VideoEncoder for ApngEncoder {
    fn file_name(&self) -> &str {
        "keyframes.apng"
    }

    fn encode(&self, _pngs: &[PathBuf], frames: &[Frame], fps: f64, output: &Path) -> Result<(), String> {
        write_apng(output, frames, fps)
    }
}

/// Files produced for one job, with their sizes after the final rename.
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenArtifacts {
    pub dir: PathBuf,
    pub frames: Vec<(PathBuf, u64)>,
    pub video: Option<(PathBuf, u64)>,
    pub selection: PathBuf,
}

impl WrittenArtifacts {
    pub fn frame_bytes(&self) -> u64 {
        self.frames.iter().map(|(_, n)| n).sum()
    }

    pub fn video_bytes(&self) -> u64 {
        self.video.as_ref().map_or(0, |(_, n)| *n)
    }

    /// Keyframe artifacts only; `selection.json` is bookkeeping.
    pub fn comp_bytes(&self) -> u64 {
        self.frame_bytes() + self.video_bytes()
    }
}

fn write_png(path: &Path, frame: &Frame) -> Result<(), WriteError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    image::codecs::png::PngEncoder::new(&mut w)
        .write_image(&frame.pixels, frame.width, frame.height, image::ExtendedColorType::Rgb8)
        .map_err(|e| WriteError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    w.flush().map_err(io_err(path))
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

/// Writes `frame_<index>.png` per frame, optionally a clip, and
/// `selection.json`, then moves the lot to `job_dir`. An existing `job_dir`
/// is replaced.
pub fn write_selection(
    job_dir: &Path,
    selection: &SelectionFile,
    frames: &[Frame],
    video: Option<(&dyn VideoEncoder, f64)>,
) -> Result<WrittenArtifacts, WriteError> {
    if frames.windows(2).any(|w| w[0].index >= w[1].index) {
        return Err(WriteError::Unordered);
    }
    let name = job_dir
        .file_name()
        .ok_or_else(|| WriteError::Io { path: job_dir.to_path_buf(), message: "job directory has no name".into() })?;
    let parent = job_dir.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(io_err(parent))?;
    let staging = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(io_err(&staging))?;
    }
    fs::create_dir(&staging).map_err(io_err(&staging))?;

    let staged = (|| {
        let mut pngs = Vec::with_capacity(frames.len());
        for f in frames {
            let p = staging.join(frame_file_name(f.index));
            write_png(&p, f)?;
            pngs.push(p);
        }
        let mut video_name = None;
        if let Some((encoder, fps)) = video {
            if !frames.is_empty() {
                let out = staging.join(encoder.file_name());
                encoder.encode(&pngs, frames, fps, &out).map_err(WriteError::Encode)?;
                video_name = Some(encoder.file_name().to_string());
            }
        }
        let json_path = staging.join(SELECTION_FILE);
        let body = serde_json::to_vec_pretty(selection)
            .map_err(|e| WriteError::Io { path: json_path.clone(), message: e.to_string() })?;
        fs::write(&json_path, body).map_err(io_err(&json_path))?;
        if job_dir.exists() {
            fs::remove_dir_all(job_dir).map_err(io_err(job_dir))?;
        }
        fs::rename(&staging, job_dir).map_err(io_err(job_dir))?;
        Ok(video_name)
    })();
    let video_name = match staged {
        Ok(v) => v,
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }
    };

    let stat = |p: PathBuf| -> Result<(PathBuf, u64), WriteError> {
        let n = fs::metadata(&p).map_err(io_err(&p))?.len();
        Ok((p, n))
    };
    let frames = frames.iter().map(|f| stat(job_dir.join(frame_file_name(f.index)))).collect::<Result<Vec<_>, _>>()?;
    let video = video_name.map(|n| stat(job_dir.join(n))).transpose()?;
    Ok(WrittenArtifacts { dir: job_dir.to_path_buf(), frames, video, selection: job_dir.join(SELECTION_FILE) })
}

pub fn read_selection(path: &Path) -> Result<SelectionFile, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}
