//! Per-job records, run aggregates, and their JSON / CSV forms.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use keyframe_core::metrics::{compression_ratio, mean, success_rate, CompressionStats, JobOutcome, MetricError};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::videoio::{read_selection, SelectionStatus, SELECTION_FILE};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job_key: String,
    pub video_id: String,
    pub selector: String,
    pub mode: Option<String>,
    pub status: SelectionStatus,
    pub error: Option<String>,
    pub n_selected: usize,
    /// Seconds from decode start to selection result.
    pub wall_time: f64,
    /// Seconds inside the selection strategy alone.
    pub select_time: f64,
    pub orig_bytes: u64,
    /// Emitted keyframe artifacts: PNGs plus the clip, if any.
    pub comp_bytes: u64,
    /// The clip's share of `comp_bytes`.
    pub video_bytes: u64,
}

impl JobRecord {
    pub fn outcome(&self) -> JobOutcome {
        JobOutcome { ok: self.status == SelectionStatus::Ok, n_selected: self.n_selected }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Compression {
    pub orig_bytes: u64,
    pub comp_bytes: u64,
    pub ratio: f64,
}

impl From<CompressionStats> for Compression {
    fn from(s: CompressionStats) -> Self {
        Self { orig_bytes: s.orig_bytes, comp_bytes: s.comp_bytes, ratio: s.ratio }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub jobs: usize,
    pub succeeded: usize,
    pub k: usize,
    pub success_rate: f64,
    /// Mean `wall_time` over jobs that finished, seconds per video.
    pub mean_speed: Option<f64>,
    /// All keyframe artifacts, summed over jobs.
    pub compression: Option<Compression>,
    /// PNG frames only.
    pub frames_only: Option<Compression>,
    /// Reassembled clips only, present when any were emitted.
    pub video_only: Option<Compression>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub per_job: Vec<JobRecord>,
    pub aggregate: Aggregate,
}

fn summed(records: &[JobRecord], bytes: impl Fn(&JobRecord) -> u64) -> Option<Compression> {
    let orig: u64 = records.iter().map(|r| r.orig_bytes).sum();
    let comp: u64 = records.iter().map(bytes).sum();
    compression_ratio(orig, comp).ok().map(Compression::from)
}

impl RunReport {
    pub fn from_records(per_job: Vec<JobRecord>, k: usize) -> Result<Self, MetricError> {
        let outcomes: Vec<JobOutcome> = per_job.iter().map(JobRecord::outcome).collect();
        let rate = success_rate(&outcomes, k)?;
        let finished: Vec<f64> =
            per_job.iter().filter(|r| r.status == SelectionStatus::Ok).map(|r| r.wall_time).collect();
        let any_video = per_job.iter().any(|r| r.video_bytes > 0);
        let aggregate = Aggregate {
            jobs: per_job.len(),
            succeeded: outcomes.iter().filter(|o| o.succeeded(k)).count(),
            k,
            success_rate: rate,
            mean_speed: mean(&finished),
            compression: summed(&per_job, |r| r.comp_bytes),
            frames_only: summed(&per_job, |r| r.comp_bytes - r.video_bytes),
            video_only: if any_video { summed(&per_job, |r| r.video_bytes) } else { None },
        };
        Ok(Self { per_job, aggregate })
    }
}

/// Rounds to 6 significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(sig6(x))) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Metric(#[from] MetricError),
    #[error("{0}")]
    Invalid(String),
}

pub const CSV_HEADER: [&str; 12] = [
    "job_key",
    "video_id",
    "selector",
    "mode",
    "status",
    "error",
    "n_selected",
    "wall_time",
    "select_time",
    "orig_bytes",
    "comp_bytes",
    "video_bytes",
];

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(r: &JobRecord) -> String {
    let status = match r.status {
        SelectionStatus::Ok => "ok",
        SelectionStatus::Failed => "failed",
    };
    [
        csv_field(&r.job_key),
        csv_field(&r.video_id),
        csv_field(&r.selector),
        csv_field(r.mode.as_deref().unwrap_or("")),
        status.to_string(),
        csv_field(r.error.as_deref().unwrap_or("")),
        r.n_selected.to_string(),
        sig6(r.wall_time).to_string(),
        sig6(r.select_time).to_string(),
        r.orig_bytes.to_string(),
        r.comp_bytes.to_string(),
        r.video_bytes.to_string(),
    ]
    .join(",")
}

/// Serializes with a fixed field order and floats at 6 significant digits.
/// CSV carries the per-job rows under a header.
pub fn emit_report<W: Write>(report: &RunReport, format: ReportFormat, mut out: W) -> Result<(), ReportError> {
    if report.per_job.is_empty() {
        return Err(MetricError::NoJobs.into());
    }
    match format {
        ReportFormat::Json => {
            let mut v = serde_json::to_value(report).map_err(|e| ReportError::Invalid(e.to_string()))?;
            round_floats(&mut v);
            serde_json::to_writer_pretty(&mut out, &v).map_err(|e| ReportError::Invalid(e.to_string()))?;
            writeln!(out)?;
        }
        ReportFormat::Csv => {
            writeln!(out, "{}", CSV_HEADER.join(","))?;
            for r in &report.per_job {
                writeln!(out, "{}", csv_row(r))?;
            }
        }
    }
    Ok(())
}

fn write_atomic(path: &Path, body: &[u8]) -> Result<(), ReportError> {
    let tmp = path.with_extension("partial");
    let wrap = |source| ReportError::Write { path: path.to_path_buf(), source };
    fs::write(&tmp, body).map_err(wrap)?;
    fs::rename(&tmp, path).map_err(wrap)
}

/// Writes `report.json` and `report.csv` under `dir`.
pub fn write_reports(report: &RunReport, dir: &Path) -> Result<(PathBuf, PathBuf), ReportError> {
    let (json, csv) = (dir.join(REPORT_JSON), dir.join(REPORT_CSV));
    let mut buf = Vec::new();
    emit_report(report, ReportFormat::Json, &mut buf)?;
    write_atomic(&json, &buf)?;
    buf.clear();
    emit_report(report, ReportFormat::Csv, &mut buf)?;
    write_atomic(&csv, &buf)?;
    Ok((json, csv))
}

/// Rebuilds a report from the `selection.json` files of a finished run.
/// Artifact sizes are re-read from disk. `k` defaults to the value recorded
/// in the selections.
pub fn reaggregate(run_dir: &Path, k: Option<usize>) -> Result<RunReport, ReportError> {
    let mut found = Vec::new();
    for entry in fs::read_dir(run_dir)? {
        let dir = entry?.path();
        let hidden = dir.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.'));
        if !dir.is_dir() || hidden || !dir.join(SELECTION_FILE).is_file() {
            continue;
        }
        let sel = read_selection(&dir.join(SELECTION_FILE)).map_err(ReportError::Invalid)?;
        let mut frame_bytes = 0;
        for &i in &sel.indices {
            frame_bytes += fs::metadata(dir.join(crate::videoio::frame_file_name(i)))?.len();
        }
        let mut video_bytes = 0;
        for e in fs::read_dir(&dir)? {
            let p = e?.path();
            if p.file_stem().is_some_and(|s| s == "keyframes") {
                video_bytes += fs::metadata(&p)?.len();
            }
        }
        found.push((sel, frame_bytes, video_bytes));
    }
    found.sort_by(|a, b| (a.0.job_index, &a.0.job_key).cmp(&(b.0.job_index, &b.0.job_key)));
    let k = match k.or_else(|| found.first().map(|f| f.0.k)) {
        Some(k) => k,
        None => return Err(MetricError::NoJobs.into()),
    };
    let records = found
        .into_iter()
        .map(|(sel, frame_bytes, video_bytes)| JobRecord {
            job_key: if sel.job_key.is_empty() { sel.video_id.clone() } else { sel.job_key },
            video_id: sel.video_id,
            selector: sel.selector,
            mode: sel.mode,
            status: sel.status,
            error: sel.error,
            n_selected: sel.indices.len(),
            wall_time: sel.wall_time,
            select_time: sel.select_time,
            orig_bytes: sel.orig_bytes,
            comp_bytes: frame_bytes + video_bytes,
            video_bytes,
        })
        .collect();
    Ok(RunReport::from_records(records, k)?)
}
