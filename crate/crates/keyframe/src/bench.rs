//! Per-selector selection speed over repeated runs of one corpus.

use std::io::Write;

use keyframe_core::metrics::{mean, percentile};
use keyframe_core::SelectorKind;

use crate::config::RunConfig;
use crate::pipeline::{bench_dir, run_with, Components, RunError};
use crate::report::sig6;
use crate::videoio::SelectionStatus;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub selector: SelectorKind,
    pub videos: usize,
    pub repetitions: usize,
    /// Mean over videos of each video's average `wall_time`, seconds.
    pub mean_s: f64,
    /// Nearest-rank 95th percentile of the same per-video averages.
    pub p95_s: f64,
}

/// Runs every selector `repetitions` times. Each run writes under
/// `<out>/bench/<selector>/rep<i>`. Jobs that failed in any repetition do
/// not contribute timings.
pub fn bench_with(
    config: &RunConfig,
    selectors: &[SelectorKind],
    repetitions: usize,
    components: &Components,
) -> Result<Vec<BenchRow>, RunError> {
    if repetitions == 0 {
        return Err(RunError::Config("repetitions must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(selectors.len());
    for &selector in selectors {
        let mut per_video: Vec<Option<Vec<f64>>> = Vec::new();
        for rep in 0..repetitions {
            let cfg = RunConfig { selector, out_dir: bench_dir(&config.out_dir, selector, rep), ..config.clone() };
            let report = run_with(&cfg, components)?;
            if per_video.is_empty() {
                per_video = vec![Some(Vec::new()); report.per_job.len()];
            }
            for (slot, rec) in per_video.iter_mut().zip(&report.per_job) {
                match (slot.as_mut(), rec.status) {
                    (Some(times), SelectionStatus::Ok) => times.push(rec.wall_time),
                    _ => *slot = None,
                }
            }
        }
        let averages: Vec<f64> = per_video.into_iter().flatten().filter_map(|t| mean(&t)).collect();
        rows.push(BenchRow {
            selector,
            videos: averages.len(),
            repetitions,
            mean_s: mean(&averages).unwrap_or(f64::NAN),
            p95_s: percentile(&averages, 95.0).unwrap_or(f64::NAN),
        });
    }
    Ok(rows)
}

pub fn bench(config: &RunConfig, selectors: &[SelectorKind], repetitions: usize) -> Result<Vec<BenchRow>, RunError> {
    let components = Components::from_config(config, selectors.iter().any(|s| s.needs_query()))?;
    bench_with(config, selectors, repetitions, &components)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "selector,videos,repetitions,mean_s,p95_s")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.selector, r.videos, r.repetitions, sig6(r.mean_s), sig6(r.p95_s))?;
    }
    Ok(())
}
