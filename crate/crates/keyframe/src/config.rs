//! Run configuration. Values come from defaults, then an optional TOML file,
//! then command-line flags, each layer overriding the previous one.

use std::path::{Path, PathBuf};

use keyframe_core::{QueryMode, SelectorKind, DEFAULT_CN, DEFAULT_K};
use serde::Deserialize;

use crate::videoio::{DEFAULT_ENCODE_CMD, DEFAULT_EXTRACT_CMD, DEFAULT_PROBE_CMD};

pub const ENDPOINT_ENV: &str = "KEYFRAME_ENDPOINT";
pub const MAX_BATCH_SIZE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderConfig {
    Mock,
    Remote { endpoint: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    /// Native for PNG/APNG, command templates for everything else.
    Auto,
    Native,
    Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Command,
    Apng,
}

impl std::str::FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(DecoderKind::Auto),
            "native" => Ok(DecoderKind::Native),
            "command" => Ok(DecoderKind::Command),
            _ => Err(format!("unknown decoder {s:?} (expected auto, native, command)")),
        }
    }
}

impl std::str::FromStr for EncoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "command" => Ok(EncoderKind::Command),
            "apng" => Ok(EncoderKind::Apng),
            _ => Err(format!("unknown encoder {s:?} (expected command, apng)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub out_dir: PathBuf,
    pub selector: SelectorKind,
    pub mode: QueryMode,
    pub cn: usize,
    pub k: usize,
    pub provider: ProviderConfig,
    pub jobs: usize,
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub seed: u64,
    pub emit_video: bool,
    pub output_fps: f64,
    pub decoder: DecoderKind,
    pub probe_cmd: String,
    pub extract_cmd: String,
    pub encoder: EncoderKind,
    pub encode_cmd: String,
    /// The CLI exits nonzero when the run's success rate is below this.
    pub min_success_rate: f64,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            manifest: manifest.into(),
            out_dir: out_dir.into(),
            selector: SelectorKind::TextSim,
            mode: QueryMode::QuestionAnswer,
            cn: DEFAULT_CN,
            k: DEFAULT_K,
            provider: ProviderConfig::Mock,
            jobs: 1,
            batch_size: MAX_BATCH_SIZE,
            max_in_flight: 4,
            seed: 0,
            emit_video: false,
            output_fps: 1.0,
            decoder: DecoderKind::Auto,
            probe_cmd: DEFAULT_PROBE_CMD.to_string(),
            extract_cmd: DEFAULT_EXTRACT_CMD.to_string(),
            encoder: EncoderKind::Command,
            encode_cmd: DEFAULT_ENCODE_CMD.to_string(),
            min_success_rate: 0.0,
        }
    }

    /// Hard errors for unusable values. `cn < k` is allowed; selection
    /// then saturates at the coarse count.
    pub fn validate(&self) -> Result<(), String> {
        if self.jobs < 1 {
            return Err("jobs must be at least 1".into());
        }
        if self.k < 1 || self.cn < 1 {
            return Err("k and cn must be at least 1".into());
        }
        if self.batch_size < 1 || self.batch_size > MAX_BATCH_SIZE {
            return Err(format!("batch_size must be within 1..={MAX_BATCH_SIZE}"));
        }
        if !(self.output_fps.is_finite() && self.output_fps > 0.0) {
            return Err("output_fps must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.min_success_rate) {
            return Err("min_success_rate must be within [0, 1]".into());
        }
        if let ProviderConfig::Remote { endpoint } = &self.provider {
            if endpoint.is_empty() {
                return Err("remote provider needs an endpoint".into());
            }
        }
        if self.cn < self.k {
            log::warn!("cn ({}) < k ({}): selections will saturate at {} frames", self.cn, self.k, self.cn);
        }
        Ok(())
    }
}

/// One configuration layer. Every field is optional; set fields override.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub selector: Option<String>,
    pub mode: Option<String>,
    pub cn: Option<usize>,
    pub k: Option<usize>,
    /// "mock" or "remote".
    pub provider: Option<String>,
    pub endpoint: Option<String>,
    pub jobs: Option<usize>,
    pub batch_size: Option<usize>,
    pub max_in_flight: Option<usize>,
    pub seed: Option<u64>,
    pub emit_video: Option<bool>,
    pub output_fps: Option<f64>,
    pub decoder: Option<DecoderKind>,
    pub probe_cmd: Option<String>,
    pub extract_cmd: Option<String>,
    pub encoder: Option<EncoderKind>,
    pub encode_cmd: Option<String>,
    pub min_success_rate: Option<f64>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Layers `over` on top of `self`.
    pub fn merge(self, over: ConfigLayer) -> ConfigLayer {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigLayer { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            manifest,
            out,
            selector,
            mode,
            cn,
            k,
            provider,
            endpoint,
            jobs,
            batch_size,
            max_in_flight,
            seed,
            emit_video,
            output_fps,
            decoder,
            probe_cmd,
            extract_cmd,
            encoder,
            encode_cmd,
            min_success_rate
        )
    }

    /// Resolves against defaults. `env_endpoint` is used only when no layer
    /// names an endpoint.
    pub fn resolve(self, env_endpoint: Option<String>) -> Result<RunConfig, String> {
        let manifest = self.manifest.ok_or("no manifest given (--manifest)")?;
        let out = self.out.ok_or("no output directory given (--out)")?;
        let mut cfg = RunConfig::new(manifest, out);
        if let Some(s) = self.selector {
            cfg.selector = s.parse().map_err(|e: keyframe_core::strategy::StrategyError| e.to_string())?;
        }
        if let Some(m) = self.mode {
            cfg.mode = m.parse().map_err(|e: keyframe_core::QueryError| e.to_string())?;
        }
        let endpoint = self.endpoint.or(env_endpoint);
        cfg.provider = match self.provider.as_deref() {
            None | Some("mock") => ProviderConfig::Mock,
            Some("remote") => ProviderConfig::Remote { endpoint: endpoint.ok_or("remote provider needs --endpoint")? },
            Some(other) => return Err(format!("unknown provider {other:?} (expected mock or remote)")),
        };
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f { cfg.$g = v; })* };
        }
        set!(
            cn => cn, k => k, jobs => jobs, batch_size => batch_size, max_in_flight => max_in_flight, seed => seed,
            emit_video => emit_video, output_fps => output_fps, decoder => decoder, probe_cmd => probe_cmd,
            extract_cmd => extract_cmd, encoder => encoder, encode_cmd => encode_cmd,
            min_success_rate => min_success_rate
        );
        cfg.validate()?;
        Ok(cfg)
    }
}
