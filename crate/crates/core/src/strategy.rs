//! Selector strategies over a coarse candidate set.
//!
//! Every function here returns *positions* into the coarse set (or scored
//! frames carrying original indices), always in ascending temporal order and
//! never more than `k` long.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::rng::SplitMix64;
use crate::sampling::coarse_indices;
use crate::score::{cosine_score, select_topk, ScoreError, ScoredFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectorKind {
    /// Text-conditioned similarity ranking.
    TextSim,
    Uniform,
    Random,
    Cluster,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] =
        [SelectorKind::TextSim, SelectorKind::Uniform, SelectorKind::Random, SelectorKind::Cluster];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::TextSim => "clip",
            SelectorKind::Uniform => "uniform",
            SelectorKind::Random => "random",
            SelectorKind::Cluster => "cluster",
        }
    }

    pub fn needs_query(self) -> bool {
        self == SelectorKind::TextSim
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("unsupported strategy {0:?}: learned video summarization is not part of this build")]
    Unsupported(String),
    #[error("unknown strategy {0:?} (expected clip, uniform, random, cluster)")]
    Unknown(String),
}

impl FromStr for SelectorKind {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "clip" | "textsim" | "text-sim" => Ok(SelectorKind::TextSim),
            "uniform" => Ok(SelectorKind::Uniform),
            "random" => Ok(SelectorKind::Random),
            "cluster" => Ok(SelectorKind::Cluster),
            "dsnet" => Err(StrategyError::Unsupported(String::from(s))),
            _ => Err(StrategyError::Unknown(String::from(s))),
        }
    }
}

/// Evenly spaced positions, endpoints included.
pub fn uniform_positions(len: usize, k: usize) -> Vec<usize> {
    coarse_indices(len, k.max(1))
}

/// `min(k, len)` distinct positions drawn by a partial Fisher-Yates shuffle.
pub fn random_positions(len: usize, k: usize, seed: u64) -> Vec<usize> {
    let take = k.min(len);
    let mut pool: Vec<usize> = (0..len).collect();
    let mut rng = SplitMix64::new(seed);
    for i in 0..take {
        let j = i + rng.below((len - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(take);
    pool.sort_unstable();
    pool
}

/// Scores each candidate against the query and keeps the top `k`.
///
/// `candidates` pairs the original frame index with its embedding. Inputs
/// need not be unit length.
pub fn rank_by_similarity(
    query: &[f32],
    candidates: &[(usize, &[f32])],
    k: usize,
) -> Result<Vec<ScoredFrame>, ScoreError> {
    let scored = candidates
        .iter()
        .map(|&(index, emb)| cosine_score(emb, query).map(|s| ScoredFrame::scored(index, s)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(select_topk(&scored, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uniform_over_thirty_two() {
        assert_eq!(uniform_positions(32, 8), vec![0, 4, 9, 13, 18, 22, 27, 31]);
        assert_eq!(uniform_positions(32, 1), vec![0]);
        assert_eq!(uniform_positions(32, 32), (0..32).collect::<Vec<_>>());
    }

    #[test]
    fn random_is_seeded() {
        let a = random_positions(32, 8, 1);
        assert_eq!(a, random_positions(32, 8, 1));
        assert_eq!(a.len(), 8);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(random_positions(32, 32, 5), (0..32).collect::<Vec<_>>());
        assert_eq!(random_positions(3, 8, 5), vec![0, 1, 2]);
    }

    #[test]
    fn parse_names() {
        for s in SelectorKind::ALL {
            assert_eq!(s.as_str().parse::<SelectorKind>().unwrap(), s);
        }
        assert!(matches!("dsnet".parse::<SelectorKind>(), Err(StrategyError::Unsupported(_))));
        assert!(matches!("katna".parse::<SelectorKind>(), Err(StrategyError::Unknown(_))));
    }

    #[test]
    fn ranking_keeps_best_in_time_order() {
        let q = [1.0f32, 0.0];
        let a = [1.0f32, 0.0];
        let b = [0.0f32, 1.0];
        let c = [0.6f32, 0.8];
        let cands: Vec<(usize, &[f32])> = vec![(10, &b), (20, &a), (30, &c)];
        let got = rank_by_similarity(&q, &cands, 2).unwrap();
        assert_eq!(got.iter().map(|s| s.frame_index).collect::<Vec<_>>(), vec![20, 30]);
        assert!(rank_by_similarity(&q, &[(0, &[1.0f32][..])], 1).is_err());
    }

    proptest::proptest! {
        #[test]
        fn random_positions_are_distinct_and_bounded(len in 0usize..100, k in 1usize..40, seed: u64) {
            let p = random_positions(len, k, seed);
            proptest::prop_assert_eq!(p.len(), k.min(len));
            proptest::prop_assert!(p.windows(2).all(|w| w[0] < w[1]));
            proptest::prop_assert!(p.iter().all(|&x| x < len));
        }
    }
}
