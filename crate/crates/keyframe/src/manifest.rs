//! Newline-delimited JSON manifests of (video, question, answer) records.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use keyframe_core::{build_text_query, QueryError, QueryMode, TextQuery};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub video_id: String,
    pub video_path: PathBuf,
    pub question: String,
    pub answer: String,
    /// `video_id#ordinal`, where the ordinal counts earlier records with the
    /// same `video_id`. Unique within a manifest.
    pub job_key: String,
}

impl ManifestEntry {
    pub fn query(&self, mode: QueryMode, token_budget: usize) -> Result<TextQuery, QueryError> {
        build_text_query(&self.question, &self.answer, mode, token_budget)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

const KEYS: [&str; 4] = ["video_id", "video", "question", "answer"];

fn string_field<'a>(obj: &'a Map<String, Value>, key: &str, line: usize) -> Result<&'a str, ManifestError> {
    match obj.get(key) {
        None => Err(ManifestError::Line { line, message: format!("missing key {key}") }),
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(ManifestError::Line { line, message: format!("key {key} must be a string") }),
    }
}

/// Parses records in file order. Blank lines are skipped; unknown keys are
/// ignored. Video paths are returned as written.
pub fn parse_manifest<R: BufRead>(source: R) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut entries = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| ManifestError::Line { line: line_no, message: e.to_string() })?;
        if text.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| ManifestError::Line { line: line_no, message: format!("malformed record: {e}") })?;
        let Value::Object(obj) = value else {
            return Err(ManifestError::Line { line: line_no, message: "record is not an object".into() });
        };
        let mut fields = [""; 4];
        for (slot, key) in fields.iter_mut().zip(KEYS) {
            *slot = string_field(&obj, key, line_no)?;
        }
        let [video_id, video, question, answer] = fields;
        if video_id.is_empty() {
            return Err(ManifestError::Line { line: line_no, message: "video_id is empty".into() });
        }
        if video.is_empty() {
            return Err(ManifestError::Line { line: line_no, message: "video is empty".into() });
        }
        if question.trim().is_empty() && answer.trim().is_empty() {
            return Err(ManifestError::Line { line: line_no, message: "question and answer are both empty".into() });
        }
        let ordinal = seen.entry(video_id.to_string()).or_insert(0);
        entries.push(ManifestEntry {
            video_id: video_id.to_string(),
            video_path: PathBuf::from(video),
            question: question.to_string(),
            answer: answer.to_string(),
            job_key: format!("{video_id}#{ordinal}"),
        });
        *ordinal += 1;
    }
    Ok(entries)
}

/// Reads a manifest file, resolving relative video paths against its directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, ManifestError> {
    let file = File::open(path).map_err(|e| ManifestError::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut entries = parse_manifest(BufReader::new(file))?;
    for e in &mut entries {
        if e.video_path.is_relative() {
            e.video_path = base.join(&e.video_path);
        }
    }
    Ok(entries)
}

pub fn write_manifest<W: Write>(entries: &[ManifestEntry], mut out: W) -> std::io::Result<()> {
    for e in entries {
        let record = serde_json::json!({
            "video_id": e.video_id,
            "video": e.video_path.to_string_lossy(),
            "question": e.question,
            "answer": e.answer,
        });
        writeln!(out, "{record}")?;
    }
    Ok(())
}
