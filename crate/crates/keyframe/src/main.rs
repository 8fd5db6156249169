use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use keyframe::bench::{bench, write_bench_csv};
use keyframe::config::{ConfigLayer, DecoderKind, EncoderKind, ENDPOINT_ENV};
use keyframe::corpus::{gen_corpus, CorpusSpec};
use keyframe::pipeline::run;
use keyframe::report::{reaggregate, write_reports, RunReport};
use keyframe_core::SelectorKind;

#[derive(Parser)]
#[command(name = "keyframe", version, about = "Text-conditioned keyframe selection for video QA datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select keyframes for every manifest record and write a run report.
    Select(RunArgs),
    /// Generate a synthetic planted-frame corpus with manifest and ground truth.
    GenCorpus(CorpusArgs),
    /// Time selectors over repeated runs of one corpus.
    Bench(BenchArgs),
    /// Rebuild report.json / report.csv from an existing run directory.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML file with the same keys as the flags (snake_case).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// clip, uniform, random or cluster.
    #[arg(long)]
    selector: Option<String>,
    /// answer, qa or question.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    cn: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// mock or remote.
    #[arg(long)]
    provider: Option<String>,
    /// Embedding service base URL; falls back to $KEYFRAME_ENDPOINT.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also reassemble the selected frames into a clip.
    #[arg(long)]
    emit_video: bool,
    #[arg(long)]
    output_fps: Option<f64>,
    /// auto, native or command.
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    probe_cmd: Option<String>,
    #[arg(long)]
    extract_cmd: Option<String>,
    /// command or apng.
    #[arg(long)]
    encoder: Option<String>,
    #[arg(long)]
    encode_cmd: Option<String>,
    /// Exit with status 2 when the success rate falls below this.
    #[arg(long)]
    min_success_rate: Option<f64>,
}

impl RunArgs {
    fn resolve(self) -> Result<keyframe::config::RunConfig> {
        let file = match &self.config {
            Some(p) => ConfigLayer::from_file(p).map_err(anyhow::Error::msg)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            manifest: self.manifest,
            out: self.out,
            selector: self.selector,
            mode: self.mode,
            cn: self.cn,
            k: self.k,
            provider: self.provider,
            endpoint: self.endpoint,
            jobs: self.jobs,
            batch_size: self.batch_size,
            max_in_flight: self.max_in_flight,
            seed: self.seed,
            emit_video: self.emit_video.then_some(true),
            output_fps: self.output_fps,
            decoder: self.decoder.map(|s| s.parse::<DecoderKind>()).transpose().map_err(anyhow::Error::msg)?,
            probe_cmd: self.probe_cmd,
            extract_cmd: self.extract_cmd,
            encoder: self.encoder.map(|s| s.parse::<EncoderKind>()).transpose().map_err(anyhow::Error::msg)?,
            encode_cmd: self.encode_cmd,
            min_success_rate: self.min_success_rate,
        };
        file.merge(flags).resolve(std::env::var(ENDPOINT_ENV).ok()).map_err(anyhow::Error::msg)
    }
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    videos: usize,
    #[arg(long, default_value_t = 24.0)]
    fps: f64,
    /// Seconds per video.
    #[arg(long, default_value_t = 2.0)]
    duration: f64,
    #[arg(long, default_value_t = 64)]
    width: u32,
    #[arg(long, default_value_t = 64)]
    height: u32,
    #[arg(long, default_value = "red")]
    planted_color: String,
    #[arg(long, default_value = "blue")]
    distractor_color: String,
    /// Comma-separated frame indices planted in every video.
    #[arg(long, value_delimiter = ',')]
    planted: Option<Vec<usize>>,
    /// Random planted frames per video when --planted is not given.
    #[arg(long, default_value_t = 8)]
    planted_count: usize,
    #[arg(long, default_value_t = 0)]
    noise: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated selectors to time.
    #[arg(long, value_delimiter = ',', default_value = "clip,uniform,random,cluster")]
    selectors: Vec<String>,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory holding <job>/selection.json.
    #[arg(long)]
    out: PathBuf,
    /// Success threshold; defaults to the k recorded by the run.
    #[arg(long)]
    k: Option<usize>,
}

fn summarize(report: &RunReport) {
    let a = &report.aggregate;
    println!("jobs: {}  succeeded: {}  success_rate: {:.4}", a.jobs, a.succeeded, a.success_rate);
    if let Some(speed) = a.mean_speed {
        println!("mean selection speed: {speed:.4} s/video");
    }
    if let Some(c) = &a.compression {
        println!("compression: {} -> {} bytes, ratio {:.3}", c.orig_bytes, c.comp_bytes, c.ratio);
    }
    for r in report.per_job.iter().filter(|r| r.error.is_some()) {
        println!("failed {}: {}", r.job_key, r.error.as_deref().unwrap_or_default());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Select(args) => {
            let config = args.resolve()?;
            let report = run(&config)?;
            summarize(&report);
            if report.aggregate.success_rate < config.min_success_rate {
                eprintln!(
                    "success rate {:.4} below threshold {:.4}",
                    report.aggregate.success_rate, config.min_success_rate
                );
                return Ok(ExitCode::from(2));
            }
        }
        Command::GenCorpus(a) => {
            let spec = CorpusSpec {
                n_videos: a.videos,
                fps: a.fps,
                duration_s: a.duration,
                width: a.width,
                height: a.height,
                planted_color: a.planted_color,
                distractor_color: a.distractor_color,
                planted_positions: a.planted,
                planted_count: a.planted_count,
                noise: a.noise,
            };
            let corpus = gen_corpus(&spec, &a.out, a.seed)?;
            println!("{} videos, manifest {}", corpus.videos.len(), corpus.manifest.display());
        }
        Command::Bench(a) => {
            let selectors = a.selectors.iter().map(|s| s.parse::<SelectorKind>()).collect::<Result<Vec<_>, _>>()?;
            if selectors.is_empty() {
                bail!("no selectors given");
            }
            let config = a.run.resolve()?;
            let rows = bench(&config, &selectors, a.repetitions)?;
            let mut buf = Vec::new();
            write_bench_csv(&rows, &mut buf)?;
            let path = config.out_dir.join("bench.csv");
            std::fs::write(&path, &buf).with_context(|| path.display().to_string())?;
            print!("{}", String::from_utf8_lossy(&buf));
        }
        Command::Report(a) => {
            let report = reaggregate(&a.out, a.k)?;
            write_reports(&report, &a.out)?;
            summarize(&report);
        }
    }
    Ok(ExitCode::SUCCESS)
}
