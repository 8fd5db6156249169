//! HTTP client for the `/v1` embedding protocol.
//!
//! Requests are batched, each batch is retried with exponential backoff on
//! transport errors and 5xx/429 responses, and the number of requests in
//! flight across all callers is capped.

use std::io::Cursor;
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use base64::Engine;
use image::{ImageEncoder, RgbImage};
use keyframe_core::{Frame, TextQuery};
use serde::{Deserialize, Serialize};

use super::{l2_norm, Embedding, EmbeddingProvider, ProviderError, ProviderInfo};

/// Server vectors are renormalized when this close to unit length and
/// rejected otherwise.
const SERVER_NORM_SLACK: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct RemoteOptions {
    /// Items per request, at most 32 by default.
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub timeout: Duration,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_in_flight: 4,
            max_attempts: 3,
            base_delay: Duration::from_millis(200),
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Serialize)]
struct TextRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Serialize)]
struct ImageRequest {
    images: Vec<String>,
}

#[derive(Deserialize)]
struct VectorsResponse {
    vectors: Vec<Vec<f32>>,
}

struct InFlight {
    used: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn new(cap: usize) -> Self {
        Self { used: Mutex::new(0), freed: Condvar::new(), cap: cap.max(1) }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used >= self.cap {
            used = self.freed.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= 1;
        self.0.freed.notify_one();
    }
}

pub struct RemoteProvider {
    endpoint: String,
    client: reqwest::blocking::Client,
    options: RemoteOptions,
    info: ProviderInfo,
    in_flight: InFlight,
}

impl RemoteProvider {
    /// Connects to `endpoint` (e.g. `http://127.0.0.1:8080`) and fetches `/v1/info`.
    pub fn connect(endpoint: &str, options: RemoteOptions) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(options.timeout)
            .build()
            .map_err(|e| ProviderError::Transport { message: e.to_string(), retryable: false })?;
        let mut provider = Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            client,
            in_flight: InFlight::new(options.max_in_flight),
            options,
            info: ProviderInfo { name: String::new(), dim: 0, token_budget: 0 },
        };
        let info: ProviderInfo = provider.post("/v1/info", &serde_json::json!({}))?;
        if info.dim < 2 || info.token_budget < 1 {
            return Err(ProviderError::Protocol(format!(
                "invalid provider info: dim {} token_budget {}",
                info.dim, info.token_budget
            )));
        }
        provider.info = info;
        Ok(provider)
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post<B: Serialize, T: for<'de> Deserialize<'de>>(&self, path: &str, body: &B) -> Result<T, ProviderError> {
        let url = format!("{}{}", self.endpoint, path);
        let mut attempt = 0;
        loop {
            attempt += 1;
            let result = {
                let _permit = self.in_flight.acquire();
                self.send_once(&url, body)
            };
            match result {
                Err(e) if e.is_retryable() && attempt < self.options.max_attempts => {
                    let delay = self.options.base_delay * 2u32.pow(attempt - 1);
                    log::debug!("{url}: attempt {attempt} failed ({e}), retrying in {delay:?}");
                    thread::sleep(delay);
                }
                other => return other,
            }
        }
    }

    fn send_once<B: Serialize, T: for<'de> Deserialize<'de>>(&self, url: &str, body: &B) -> Result<T, ProviderError> {
        let resp = self
            .client
            .post(url)
            .json(body)
            .send()
            .map_err(|e| ProviderError::Transport { message: e.to_string(), retryable: true })?;
        let status = resp.status();
        if status.is_success() {
            return resp.json::<T>().map_err(|e| ProviderError::Protocol(e.to_string()));
        }
        let message = resp.text().unwrap_or_default();
        if status.is_server_error() || status.as_u16() == 429 {
            Err(ProviderError::Transport { message: format!("{status}: {message}"), retryable: true })
        } else {
            Err(ProviderError::Rejected { status: status.as_u16(), message })
        }
    }

    fn check_vectors(&self, vectors: Vec<Vec<f32>>, expected: usize) -> Result<Vec<Embedding>, ProviderError> {
        if vectors.len() != expected {
            return Err(ProviderError::CountMismatch { expected, got: vectors.len() });
        }
        vectors
            .into_iter()
            .map(|v| {
                if v.len() != self.info.dim {
                    return Err(ProviderError::DimensionMismatch { expected: self.info.dim, got: v.len() });
                }
                let norm = l2_norm(&v);
                let drift = (norm - 1.0).abs();
                if drift.is_nan() || drift > SERVER_NORM_SLACK {
                    return Err(ProviderError::NotNormalized(norm));
                }
                Embedding::normalized(v)
            })
            .collect()
    }
}

fn encode_png(frame: &Frame) -> Result<String, ProviderError> {
    let img = RgbImage::from_raw(frame.width, frame.height, frame.pixels.clone())
        .ok_or_else(|| ProviderError::InvalidInput(format!("frame {} buffer size", frame.index)))?;
    let mut buf = Cursor::new(Vec::new());
    image::codecs::png::PngEncoder::new(&mut buf)
        .write_image(img.as_raw(), frame.width, frame.height, image::ExtendedColorType::Rgb8)
        .map_err(|e| ProviderError::InvalidInput(e.to_string()))?;
    Ok(base64::engine::general_purpose::STANDARD.encode(buf.into_inner()))
}

impl EmbeddingProvider for RemoteProvider {
    fn info(&self) -> &ProviderInfo {
        &self.info
    }

    fn embed_texts(&self, texts: &[TextQuery]) -> Result<Vec<Embedding>, ProviderError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.options.batch_size.max(1)) {
            let body = TextRequest { texts: chunk.iter().map(|t| t.text.as_str()).collect() };
            let resp: VectorsResponse = self.post("/v1/embed_text", &body)?;
            out.extend(self.check_vectors(resp.vectors, chunk.len())?);
        }
        Ok(out)
    }

    fn embed_images(&self, frames: &[Frame]) -> Result<Vec<Embedding>, ProviderError> {
        if frames.iter().any(Frame::is_empty) {
            return Err(ProviderError::InvalidInput("frame with zero dimensions".into()));
        }
        let chunks: Vec<&[Frame]> = frames.chunks(self.options.batch_size.max(1)).collect();
        let results: Vec<Result<Vec<Embedding>, ProviderError>> = thread::scope(|s| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| {
                    s.spawn(move || {
                        let images = chunk.iter().map(encode_png).collect::<Result<Vec<_>, _>>()?;
                        let resp: VectorsResponse = self.post("/v1/embed_image", &ImageRequest { images })?;
                        self.check_vectors(resp.vectors, chunk.len())
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(ProviderError::Protocol("batch worker panicked".into()))))
                .collect()
        });
        let mut out = Vec::with_capacity(frames.len());
        for r in results {
            out.extend(r?);
        }
        Ok(out)
    }
}
