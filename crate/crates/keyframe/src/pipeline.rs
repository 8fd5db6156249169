//! End-to-end runs: manifest in, keyframe directories and a report out.
//!
//! Jobs fan out over a fixed number of worker threads. Each job probes,
//! samples, decodes, selects and writes on its own; any failure is recorded
//! on that job and the batch carries on. A single aggregator collects the
//! records and orders them by manifest position, so the report does not
//! depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Instant;

use keyframe_core::rng::derive_seed;
use keyframe_core::{coarse_indices, Frame, SelectorKind, TextQuery};

use crate::config::{DecoderKind, EncoderKind, ProviderConfig, RunConfig};
use crate::embedder::{EmbeddingProvider, MockProvider, ProviderError, RemoteOptions, RemoteProvider};
use crate::manifest::{read_manifest, ManifestEntry, ManifestError};
use crate::report::{write_reports, JobRecord, ReportError, RunReport};
use crate::select::{run_selector, JobStatus, SelectInputs, SelectionResult};
use crate::videoio::{
    decode_frames, write_selection, ApngEncoder, AutoDecoder, CommandDecoder, CommandEncoder, CommandTemplate,
    DecoderBackend, NativeDecoder, SelectionFile, SelectionStatus, VideoEncoder, VideoMeta,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("manifest: {0}")]
    Manifest(#[from] ManifestError),
    #[error("provider: {0}")]
    Provider(#[from] ProviderError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
}

/// Hooks around each job's decode stage.
pub trait JobObserver: Send + Sync {
    fn decode_started(&self, _job_key: &str) {}
    fn decode_finished(&self, _job_key: &str) {}
}

/// The swappable pieces of a run.
pub struct Components {
    pub decoder: Arc<dyn DecoderBackend>,
    pub provider: Option<Arc<dyn EmbeddingProvider>>,
    pub encoder: Arc<dyn VideoEncoder>,
    pub observer: Option<Arc<dyn JobObserver>>,
}

impl Components {
    /// Builds the decoder, the encoder and, when `with_provider`, the
    /// embedding provider named by `config`.
    pub fn from_config(config: &RunConfig, with_provider: bool) -> Result<Self, RunError> {
        let template = |s: &str| CommandTemplate::new(s).map_err(RunError::Config);
        let command = CommandDecoder { probe: template(&config.probe_cmd)?, extract: template(&config.extract_cmd)? };
        let decoder: Arc<dyn DecoderBackend> = match config.decoder {
            DecoderKind::Auto => Arc::new(AutoDecoder::new(command)),
            DecoderKind::Native => Arc::new(NativeDecoder),
            DecoderKind::Command => Arc::new(command),
        };
        let encoder: Arc<dyn VideoEncoder> = match config.encoder {
            EncoderKind::Apng => Arc::new(ApngEncoder),
            EncoderKind::Command => {
                Arc::new(CommandEncoder { template: template(&config.encode_cmd)?, file_name: "keyframes.mp4".into() })
            }
        };
        let provider: Option<Arc<dyn EmbeddingProvider>> = match (&config.provider, with_provider) {
            (_, false) => None,
            (ProviderConfig::Mock, true) => Some(Arc::new(MockProvider::new())),
            (ProviderConfig::Remote { endpoint }, true) => {
                let options = RemoteOptions {
                    batch_size: config.batch_size,
                    max_in_flight: config.max_in_flight,
                    ..RemoteOptions::default()
                };
                Some(Arc::new(RemoteProvider::connect(endpoint, options)?))
            }
        };
        Ok(Self { decoder, provider, encoder, observer: None })
    }
}

/// Runs `config` with components built from it and writes the report.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    config.validate().map_err(RunError::Config)?;
    let components = Components::from_config(config, config.selector.needs_query())?;
    run_with(config, &components)
}

pub fn run_with(config: &RunConfig, components: &Components) -> Result<RunReport, RunError> {
    config.validate().map_err(RunError::Config)?;
    let entries = read_manifest(&config.manifest)?;
    fs::create_dir_all(&config.out_dir).map_err(|e| RunError::Config(format!("{}: {e}", config.out_dir.display())))?;
    if config.selector.needs_query() && components.provider.is_none() {
        return Err(RunError::Config("selector clip needs an embedding provider".into()));
    }
    let records = run_jobs(config, components, &entries);
    let report = RunReport::from_records(records, config.k).map_err(ReportError::from)?;
    write_reports(&report, &config.out_dir)?;
    Ok(report)
}

fn run_jobs(config: &RunConfig, components: &Components, entries: &[ManifestEntry]) -> Vec<JobRecord> {
    let next = AtomicUsize::new(0);
    let workers = config.jobs.min(entries.len()).max(1);
    let (tx, rx) = mpsc::channel::<(usize, JobRecord)>();
    thread::scope(|s| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(entry) = entries.get(i) else { break };
                if tx.send((i, run_job(i, entry, config, components))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut slots: Vec<Option<JobRecord>> = vec![None; entries.len()];
        for (i, rec) in rx {
            slots[i] = Some(rec);
        }
        slots.into_iter().flatten().collect()
    })
}

/// Directory name for a job; path separators in ids are replaced.
pub fn job_dir_name(job_key: &str) -> String {
    job_key.replace(['/', '\\'], "_")
}

struct Decoded {
    meta: VideoMeta,
    frames: Vec<Frame>,
}

fn decode(
    entry: &ManifestEntry,
    config: &RunConfig,
    backend: &dyn DecoderBackend,
) -> Result<Decoded, (Option<VideoMeta>, String)> {
    let meta = backend.probe(&entry.video_path).map_err(|e| (None, format!("decode: {e}")))?;
    let indices = coarse_indices(meta.frame_count, config.cn);
    let set = decode_frames(backend, &entry.video_path, &meta, &indices, config.cn)
        .map_err(|e| (Some(meta), format!("decode: {e}")))?;
    Ok(Decoded { meta, frames: set.frames })
}

fn run_job(job_index: usize, entry: &ManifestEntry, config: &RunConfig, components: &Components) -> JobRecord {
    let selector = config.selector;
    let seed = derive_seed(config.seed, &entry.job_key);
    let mode = selector.needs_query().then_some(config.mode);
    let query: Result<Option<TextQuery>, String> = match (&components.provider, selector.needs_query()) {
        (Some(p), true) => entry.query(config.mode, p.info().token_budget).map(Some).map_err(|e| format!("query: {e}")),
        _ => Ok(None),
    };

    let started = Instant::now();
    let (meta, frames, result) = match query {
        Err(reason) => (None, Vec::new(), SelectionResult::failed(&entry.job_key, selector, mode, config.k, reason)),
        Ok(query) => {
            if let Some(o) = &components.observer {
                o.decode_started(&entry.job_key);
            }
            let decoded = decode(entry, config, components.decoder.as_ref());
            if let Some(o) = &components.observer {
                o.decode_finished(&entry.job_key);
            }
            match decoded {
                Err((meta, reason)) => {
                    (meta, Vec::new(), SelectionResult::failed(&entry.job_key, selector, mode, config.k, reason))
                }
                Ok(Decoded { meta, frames }) => {
                    let coarse = crate::videoio::CoarseFrameSet { frames, source_meta: meta, cn_requested: config.cn };
                    let inputs = SelectInputs {
                        query: query.as_ref(),
                        provider: components.provider.as_deref(),
                        k: config.k,
                        seed,
                    };
                    let result = run_selector(selector, &entry.job_key, &coarse, &inputs);
                    (Some(meta), coarse.frames, result)
                }
            }
        }
    };
    let wall_time = started.elapsed().as_secs_f64();

    let orig_bytes =
        meta.map(|m| m.byte_size).or_else(|| fs::metadata(&entry.video_path).ok().map(|m| m.len())).unwrap_or(0);
    let chosen: Vec<Frame> = {
        let wanted = result.indices();
        frames.into_iter().filter(|f| wanted.binary_search(&f.index).is_ok()).collect()
    };
    let fps = meta.map_or(1.0, |m| m.fps);
    let selection = |status: &JobStatus| SelectionFile {
        video_id: entry.video_id.clone(),
        mode: mode.map(|m| m.as_str().to_string()),
        selector: selector.as_str().to_string(),
        k: config.k,
        cn: config.cn,
        frame_count: meta.map_or(0, |m| m.frame_count),
        indices: if status.is_ok() { result.indices() } else { Vec::new() },
        timestamps: if status.is_ok() {
            result.indices().iter().map(|&i| i as f64 / fps).collect()
        } else {
            Vec::new()
        },
        scores: if status.is_ok() { result.selected.iter().map(|s| s.score).collect() } else { Vec::new() },
        status: if status.is_ok() { SelectionStatus::Ok } else { SelectionStatus::Failed },
        error: status.error().map(str::to_string),
        job_key: entry.job_key.clone(),
        job_index,
        orig_bytes,
        wall_time,
        select_time: result.wall_time,
    };

    let dir = config.out_dir.join(job_dir_name(&entry.job_key));
    let video = config.emit_video.then(|| (components.encoder.as_ref(), config.output_fps));
    let frames_for_write: &[Frame] = if result.status.is_ok() { &chosen } else { &[] };
    let mut status = result.status.clone();
    let (comp_bytes, video_bytes) = match write_selection(&dir, &selection(&status), frames_for_write, video) {
        Ok(a) => (a.comp_bytes(), a.video_bytes()),
        Err(e) => {
            log::warn!("{}: {e}", entry.job_key);
            status = JobStatus::Failed(format!("write: {e}"));
            if let Err(e2) = write_selection(&dir, &selection(&status), &[], None) {
                log::error!("{}: could not record failure: {e2}", entry.job_key);
            }
            (0, 0)
        }
    };
    if let JobStatus::Failed(reason) = &status {
        log::info!("{} failed: {reason}", entry.job_key);
    }

    JobRecord {
        job_key: entry.job_key.clone(),
        video_id: entry.video_id.clone(),
        selector: selector.as_str().to_string(),
        mode: mode.map(|m| m.as_str().to_string()),
        status: if status.is_ok() { SelectionStatus::Ok } else { SelectionStatus::Failed },
        error: status.error().map(str::to_string),
        n_selected: if status.is_ok() { result.selected.len() } else { 0 },
        wall_time,
        select_time: result.wall_time,
        orig_bytes,
        comp_bytes,
        video_bytes,
    }
}

/// A run directory for each selector under `root`, for benchmarks.
pub fn bench_dir(root: &Path, selector: SelectorKind, repetition: usize) -> PathBuf {
    root.join("bench").join(selector.as_str()).join(format!("rep{repetition}"))
}
