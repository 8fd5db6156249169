//! Compression ratio and success-rate measures.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("empty output")]
    EmptyOutput,
    #[error("no jobs")]
    NoJobs,
}

/// Bytes before and after selection, and their quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionStats {
    pub orig_bytes: u64,
    pub comp_bytes: u64,
    pub ratio: f64,
}

pub fn compression_ratio(orig_bytes: u64, comp_bytes: u64) -> Result<CompressionStats, MetricError> {
    if comp_bytes == 0 {
        return Err(MetricError::EmptyOutput);
    }
    Ok(CompressionStats { orig_bytes, comp_bytes, ratio: orig_bytes as f64 / comp_bytes as f64 })
}

/// Size-weighted aggregate: summed bytes, not the mean of per-job ratios.
pub fn total_compression<I>(jobs: I) -> Result<CompressionStats, MetricError>
where
    I: IntoIterator<Item = (u64, u64)>,
{
    let (orig, comp) = jobs.into_iter().fold((0u64, 0u64), |(o, c), (jo, jc)| (o + jo, c + jc));
    compression_ratio(orig, comp)
}

/// Outcome of one job as seen by the success criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobOutcome {
    pub ok: bool,
    pub n_selected: usize,
}

impl JobOutcome {
    pub fn succeeded(&self, k: usize) -> bool {
        self.ok && self.n_selected >= k
    }
}

/// Fraction of jobs that finished and produced at least `k` frames.
pub fn success_rate(outcomes: &[JobOutcome], k: usize) -> Result<f64, MetricError> {
    if outcomes.is_empty() {
        return Err(MetricError::NoJobs);
    }
    let hits = outcomes.iter().filter(|o| o.succeeded(k)).count();
    Ok(hits as f64 / outcomes.len() as f64)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Nearest-rank percentile, `p` in `(0, 100]`.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = libm::ceil(p / 100.0 * sorted.len() as f64) as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ratio_examples() {
        assert_eq!(compression_ratio(100_000_000, 10_000_000).unwrap().ratio, 10.0);
        assert_eq!(compression_ratio(1234, 1234).unwrap().ratio, 1.0);
        assert_eq!(compression_ratio(5, 0), Err(MetricError::EmptyOutput));
    }

    #[test]
    fn aggregate_uses_byte_sums() {
        let t = total_compression([(100, 10), (10, 10)]).unwrap();
        assert_eq!((t.orig_bytes, t.comp_bytes), (110, 20));
        assert_eq!(t.ratio, 5.5);
        assert_eq!(total_compression([(10, 10), (100, 10)]).unwrap(), t);
    }

    #[test]
    fn success_examples() {
        let ok8 = JobOutcome { ok: true, n_selected: 8 };
        assert_eq!(success_rate(&[ok8; 10], 8).unwrap(), 1.0);
        let mut mixed = vec![ok8; 4];
        mixed.push(JobOutcome { ok: false, n_selected: 0 });
        assert_eq!(success_rate(&mixed, 8).unwrap(), 0.8);
        assert_eq!(success_rate(&[JobOutcome { ok: true, n_selected: 5 }], 8).unwrap(), 0.0);
        assert_eq!(success_rate(&[], 8), Err(MetricError::NoJobs));
    }

    #[test]
    fn percentiles() {
        assert_eq!(percentile(&[3.0], 95.0), Some(3.0));
        let v: Vec<f64> = (1..=20).map(|x| x as f64).collect();
        assert_eq!(percentile(&v, 95.0), Some(19.0));
        assert_eq!(percentile(&v, 100.0), Some(20.0));
        assert_eq!(mean(&[1.0, 2.0, 6.0]), Some(3.0));
        assert_eq!(mean(&[]), None);
    }

    proptest::proptest! {
        #[test]
        fn success_non_increasing_in_k(ns in proptest::collection::vec((proptest::bool::ANY, 0usize..20), 1..30)) {
            let outcomes: Vec<JobOutcome> = ns.iter().map(|&(ok, n)| JobOutcome { ok, n_selected: n }).collect();
            let mut prev = 1.0;
            for k in 1..22 {
                let r = success_rate(&outcomes, k).unwrap();
                proptest::prop_assert!(r <= prev);
                prev = r;
            }
        }
    }
}
