//! External-tool decoding through command templates.
//!
//! A template is a command line split with shell quoting rules; `{name}`
//! placeholders are substituted inside each argument after splitting, so
//! paths never pass through a shell.

use std::path::Path;
use std::process::{Command, Output, Stdio};

use keyframe_core::Frame;
use serde_json::Value;

use super::{file_size, DecodeError, DecoderBackend, VideoMeta};

/// Prints stream metadata as JSON. Frames are counted by decoding.
pub const DEFAULT_PROBE_CMD: &str = "ffprobe -v error -select_streams v:0 -count_frames \
     -show_entries stream=width,height,r_frame_rate,nb_read_frames -of json {input}";

/// Writes the selected frames to stdout as packed rgb24.
pub const DEFAULT_EXTRACT_CMD: &str =
    "ffmpeg -v error -i {input} -vf select={select} -vsync 0 -f rawvideo -pix_fmt rgb24 pipe:1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandTemplate {
    raw: String,
}

impl CommandTemplate {
    pub fn new(raw: impl Into<String>) -> Result<Self, String> {
        let raw = raw.into();
        match shlex::split(&raw) {
            Some(args) if !args.is_empty() => Ok(Self { raw }),
            _ => Err(format!("invalid command template {raw:?}")),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn render(&self, vars: &[(&str, &str)]) -> Vec<String> {
        shlex::split(&self.raw)
            .unwrap_or_default()
            .into_iter()
            .map(|arg| vars.iter().fold(arg, |acc, (name, value)| acc.replace(&format!("{{{name}}}"), value)))
            .collect()
    }

    /// Runs the rendered command, capturing stdout and stderr.
    pub fn run(&self, vars: &[(&str, &str)]) -> Result<Output, String> {
        let argv = self.render(vars);
        let (program, args) = argv.split_first().ok_or("empty command")?;
        let out = Command::new(program)
            .args(args)
            .stdin(Stdio::null())
            .output()
            .map_err(|e| format!("spawn {program}: {e}"))?;
        if !out.status.success() {
            let stderr = String::from_utf8_lossy(&out.stderr);
            return Err(format!("{program} exited with {}: {}", out.status, stderr.trim()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct CommandDecoder {
    pub probe: CommandTemplate,
    pub extract: CommandTemplate,
}

impl Default for CommandDecoder {
    fn default() -> Self {
        Self {
            probe: CommandTemplate::new(DEFAULT_PROBE_CMD).expect("default probe template"),
            extract: CommandTemplate::new(DEFAULT_EXTRACT_CMD).expect("default extract template"),
        }
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.split_once('/') {
            Some((a, b)) => {
                let (a, b) = (a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?);
                (b != 0.0).then(|| a / b)
            }
            None => s.trim().parse().ok(),
        },
        _ => None,
    }
}

/// Accepts ffprobe's `{"streams":[{...}]}` layout or a flat object with
/// `frame_count`, `fps`, `width`, `height`.
fn parse_probe(json: &Value) -> Result<(usize, f64, u32, u32), String> {
    let stream = json.get("streams").and_then(|s| s.get(0)).unwrap_or(json);
    let field = |names: &[&str]| names.iter().find_map(|n| stream.get(*n).and_then(as_number));
    let frames = field(&["nb_read_frames", "nb_frames", "frame_count"]).ok_or("missing frame count")?;
    let fps = field(&["r_frame_rate", "avg_frame_rate", "fps"]).ok_or("missing frame rate")?;
    let width = field(&["width"]).ok_or("missing width")?;
    let height = field(&["height"]).ok_or("missing height")?;
    if !(fps.is_finite() && fps > 0.0) || width < 1.0 || height < 1.0 || frames < 0.0 {
        return Err(format!("implausible stream parameters: {frames} frames, {fps} fps, {width}x{height}"));
    }
    Ok((frames as usize, fps, width as u32, height as u32))
}

fn select_expr(indices: &[usize]) -> String {
    indices.iter().map(|i| format!("eq(n\\,{i})")).collect::<Vec<_>>().join("+")
}

impl DecoderBackend for CommandDecoder {
    fn probe(&self, path: &Path) -> Result<VideoMeta, DecodeError> {
        let byte_size = file_size(path)?;
        if byte_size == 0 {
            return Err(DecodeError::new(path, "empty file"));
        }
        let input = path.to_string_lossy();
        let out = self.probe.run(&[("input", &input)]).map_err(|e| DecodeError::new(path, e))?;
        let json: Value =
            serde_json::from_slice(&out.stdout).map_err(|e| DecodeError::new(path, format!("probe output: {e}")))?;
        let (frame_count, fps, width, height) = parse_probe(&json).map_err(|e| DecodeError::new(path, e))?;
        Ok(VideoMeta { frame_count, fps, width, height, byte_size })
    }

    fn extract(&self, path: &Path, meta: &VideoMeta, indices: &[usize]) -> Result<Vec<Frame>, DecodeError> {
        let input = path.to_string_lossy();
        let list = indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        let count = indices.len().to_string();
        let select = select_expr(indices);
        let out = self
            .extract
            .run(&[("input", &input), ("select", &select), ("indices", &list), ("count", &count)])
            .map_err(|e| DecodeError::new(path, e))?;
        let frame_len = meta.width as usize * meta.height as usize * 3;
        if frame_len == 0 || out.stdout.len() != frame_len * indices.len() {
            return Err(DecodeError::new(
                path,
                format!("expected {} bytes of rgb24, got {}", frame_len * indices.len(), out.stdout.len()),
            ));
        }
        Ok(out
            .stdout
            .chunks_exact(frame_len)
            .zip(indices)
            .map(|(px, &i)| Frame {
                index: i,
                timestamp: meta.timestamp(i),
                width: meta.width,
                height: meta.height,
                pixels: px.to_vec(),
            })
            .collect())
    }
}
