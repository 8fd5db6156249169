//! Cosine scoring of frame embeddings against a query, and top-k selection.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("non-finite vector component")]
    NonFinite,
}

/// A candidate frame and its similarity to the query. Baseline selectors
/// leave the score empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredFrame {
    pub frame_index: usize,
    pub score: Option<f64>,
}

impl ScoredFrame {
    pub fn scored(frame_index: usize, score: f64) -> Self {
        Self { frame_index, score: Some(score) }
    }

    pub fn unscored(frame_index: usize) -> Self {
        Self { frame_index, score: None }
    }
}

/// `(v . w) / (|v| |w|)`, accumulated in `f64` in index order and clamped to `[-1, 1]`.
pub fn cosine_score(v: &[f32], w: &[f32]) -> Result<f64, ScoreError> {
    if v.len() != w.len() {
        return Err(ScoreError::DimensionMismatch(v.len(), w.len()));
    }
    let (mut dot, mut vv, mut ww) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in v.iter().zip(w) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        vv += a * a;
        ww += b * b;
    }
    if !(dot.is_finite() && vv.is_finite() && ww.is_finite()) {
        return Err(ScoreError::NonFinite);
    }
    if vv == 0.0 || ww == 0.0 {
        return Err(ScoreError::ZeroNorm);
    }
    let s = dot / (libm::sqrt(vv) * libm::sqrt(ww));
    Ok(s.clamp(-1.0, 1.0))
}

/// Descending score, then ascending frame index. Unscored frames rank last.
fn rank_order(a: &ScoredFrame, b: &ScoredFrame) -> Ordering {
    let by_score = match (a.score, b.score) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    by_score.then(a.frame_index.cmp(&b.frame_index))
}

/// The `min(k, len)` highest-scoring frames, returned in temporal order.
/// Ties go to the earlier frame.
pub fn select_topk(scores: &[ScoredFrame], k: usize) -> Vec<ScoredFrame> {
    let mut ranked: Vec<ScoredFrame> = scores.to_vec();
    let keep = k.min(ranked.len());
    if keep < ranked.len() && keep > 0 {
        ranked.select_nth_unstable_by(keep - 1, rank_order);
    }
    ranked.truncate(keep);
    ranked.sort_unstable_by_key(|s| s.frame_index);
    ranked
}
