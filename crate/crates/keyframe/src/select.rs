//! Selector strategies applied to a decoded coarse frame set.

use std::time::Instant;

use keyframe_core::cluster::cluster_positions;
use keyframe_core::metrics::JobOutcome;
use keyframe_core::strategy::{random_positions, rank_by_similarity, uniform_positions};
use keyframe_core::{QueryMode, ScoredFrame, SelectorKind, TextQuery};

use crate::embedder::{EmbeddingProvider, ProviderError};
use crate::videoio::CoarseFrameSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobStatus {
    Ok,
    Failed(String),
}

impl JobStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, JobStatus::Ok)
    }

    pub fn error(&self) -> Option<&str> {
        match self {
            JobStatus::Ok => None,
            JobStatus::Failed(reason) => Some(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub job_key: String,
    pub selector: SelectorKind,
    pub mode: Option<QueryMode>,
    pub k_requested: usize,
    /// Ascending by frame index.
    pub selected: Vec<ScoredFrame>,
    pub status: JobStatus,
    /// Seconds spent in the strategy, decoding excluded.
    pub wall_time: f64,
}

impl SelectionResult {
    pub fn failed(job_key: &str, selector: SelectorKind, mode: Option<QueryMode>, k: usize, reason: String) -> Self {
        Self {
            job_key: job_key.to_string(),
            selector,
            mode,
            k_requested: k,
            selected: Vec::new(),
            status: JobStatus::Failed(reason),
            wall_time: 0.0,
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.selected.iter().map(|s| s.frame_index).collect()
    }

    /// Finished, but with fewer than `k` frames available.
    pub fn undersized(&self) -> bool {
        self.status.is_ok() && self.selected.len() < self.k_requested
    }

    pub fn outcome(&self) -> JobOutcome {
        JobOutcome { ok: self.status.is_ok(), n_selected: self.selected.len() }
    }
}

fn finish(
    job_key: &str,
    selector: SelectorKind,
    mode: Option<QueryMode>,
    k: usize,
    started: Instant,
    selected: Result<Vec<ScoredFrame>, String>,
) -> SelectionResult {
    let (selected, status) = match selected {
        Ok(s) => (s, JobStatus::Ok),
        Err(reason) => (Vec::new(), JobStatus::Failed(reason)),
    };
    SelectionResult {
        job_key: job_key.to_string(),
        selector,
        mode,
        k_requested: k,
        selected,
        status,
        wall_time: started.elapsed().as_secs_f64(),
    }
}

fn at_positions(coarse: &CoarseFrameSet, positions: &[usize]) -> Vec<ScoredFrame> {
    positions.iter().map(|&p| ScoredFrame::unscored(coarse.frames[p].index)).collect()
}

fn provider_failure(e: ProviderError) -> String {
    format!("provider: {e}")
}

/// Embeds the query once and every coarse frame, then keeps the `k`
/// frames most similar to the query.
pub fn select_text_sim(
    job_key: &str,
    coarse: &CoarseFrameSet,
    query: &TextQuery,
    provider: &dyn EmbeddingProvider,
    k: usize,
) -> SelectionResult {
    let started = Instant::now();
    let selected = (|| {
        if coarse.is_empty() {
            return Err("no frames".to_string());
        }
        let q = provider.embed_texts(std::slice::from_ref(query)).map_err(provider_failure)?;
        let q =
            q.into_iter().next().ok_or_else(|| provider_failure(ProviderError::Protocol("no query vector".into())))?;
        let frames = provider.embed_images(&coarse.frames).map_err(provider_failure)?;
        if frames.len() != coarse.len() {
            return Err(provider_failure(ProviderError::CountMismatch { expected: coarse.len(), got: frames.len() }));
        }
        let candidates: Vec<(usize, &[f32])> =
            coarse.frames.iter().zip(&frames).map(|(f, e)| (f.index, e.values())).collect();
        rank_by_similarity(q.values(), &candidates, k).map_err(|e| format!("score: {e}"))
    })();
    finish(job_key, SelectorKind::TextSim, Some(query.mode), k, started, selected)
}

pub fn select_uniform(job_key: &str, coarse: &CoarseFrameSet, k: usize) -> SelectionResult {
    let started = Instant::now();
    let selected = if coarse.is_empty() {
        Err("no frames".to_string())
    } else {
        Ok(at_positions(coarse, &uniform_positions(coarse.len(), k)))
    };
    finish(job_key, SelectorKind::Uniform, None, k, started, selected)
}

pub fn select_random(job_key: &str, coarse: &CoarseFrameSet, k: usize, seed: u64) -> SelectionResult {
    let started = Instant::now();
    let selected = if coarse.is_empty() {
        Err("no frames".to_string())
    } else {
        Ok(at_positions(coarse, &random_positions(coarse.len(), k, seed)))
    };
    finish(job_key, SelectorKind::Random, None, k, started, selected)
}

pub fn select_cluster(job_key: &str, coarse: &CoarseFrameSet, k: usize, seed: u64) -> SelectionResult {
    let started = Instant::now();
    let selected = if coarse.is_empty() {
        Err("no frames".to_string())
    } else {
        Ok(at_positions(coarse, &cluster_positions(&coarse.frames, k, seed)))
    };
    finish(job_key, SelectorKind::Cluster, None, k, started, selected)
}

/// What a strategy may need beyond the frames themselves.
pub struct SelectInputs<'a> {
    pub query: Option<&'a TextQuery>,
    pub provider: Option<&'a dyn EmbeddingProvider>,
    pub k: usize,
    pub seed: u64,
}

pub fn run_selector(
    kind: SelectorKind,
    job_key: &str,
    coarse: &CoarseFrameSet,
    inputs: &SelectInputs<'_>,
) -> SelectionResult {
    match kind {
        SelectorKind::TextSim => match (inputs.query, inputs.provider) {
            (Some(q), Some(p)) => select_text_sim(job_key, coarse, q, p, inputs.k),
            (None, _) => SelectionResult::failed(job_key, kind, None, inputs.k, "no text query".into()),
            (Some(q), None) => {
                SelectionResult::failed(job_key, kind, Some(q.mode), inputs.k, "no embedding provider".into())
            }
        },
        SelectorKind::Uniform => select_uniform(job_key, coarse, inputs.k),
        SelectorKind::Random => select_random(job_key, coarse, inputs.k, inputs.seed),
        SelectorKind::Cluster => select_cluster(job_key, coarse, inputs.k, inputs.seed),
    }
}
