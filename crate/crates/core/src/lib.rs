//! Allocation-only building blocks for text-conditioned keyframe selection.
//!
//! Everything here is deterministic and free of IO: coarse uniform sampling,
//! cosine scoring and top-k selection, the baseline selectors (uniform,
//! seeded random, histogram clustering), the reference mock embedding rules,
//! and the compression / success-rate measures. The `keyframe` crate layers
//! video decoding, embedding services, reports and the CLI on top.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cluster;
pub mod frame;
pub mod metrics;
pub mod mock;
pub mod query;
pub mod rng;
pub mod sampling;
pub mod score;
pub mod strategy;

pub use frame::Frame;
pub use query::{build_text_query, QueryError, QueryMode, TextQuery};
pub use sampling::coarse_indices;
pub use score::{cosine_score, select_topk, ScoreError, ScoredFrame};
pub use strategy::SelectorKind;

/// Coarse candidate count used when none is configured.
pub const DEFAULT_CN: usize = 32;
/// Keyframes per job; also the success threshold for a job.
pub const DEFAULT_K: usize = 8;
/// Whitespace-token budget applied to text queries by default.
pub const DEFAULT_TOKEN_BUDGET: usize = 77;
