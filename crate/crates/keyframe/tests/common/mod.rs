#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use base64::Engine;
use keyframe_core::mock::{image_embedding, text_embedding};
use keyframe_core::Frame;
use serde_json::{json, Value};

/// Knobs for the in-process test server.
#[derive(Default)]
pub struct ServerBehavior {
    pub dim: usize,
    /// Reported dim in /v1/info; defaults to `dim`.
    pub declared_dim: Option<usize>,
    /// Respond 503 to this many embed requests before answering normally.
    pub fail_first: AtomicUsize,
    /// Always respond with this status to embed requests.
    pub always_status: Option<u16>,
    pub delay: Duration,
    /// Scale the returned vectors by this factor (1.0 = unit).
    pub scale: Option<f32>,
}

#[derive(Default)]
pub struct ServerStats {
    pub embed_requests: AtomicUsize,
    pub in_flight: AtomicUsize,
    pub max_in_flight: AtomicUsize,
    pub batch_sizes: Mutex<Vec<usize>>,
}

pub struct TestServer {
    pub url: String,
    pub stats: Arc<ServerStats>,
}

struct AppState {
    behavior: ServerBehavior,
    stats: Arc<ServerStats>,
}

type Reply = Result<Json<Value>, (StatusCode, String)>;

async fn info(State(s): State<Arc<AppState>>) -> Json<Value> {
    let dim = s.behavior.declared_dim.unwrap_or(s.behavior.dim);
    Json(json!({"name": "test-mock", "dim": dim, "token_budget": 77}))
}

async fn gate(s: &AppState, n: usize) -> Result<(), (StatusCode, String)> {
    s.stats.embed_requests.fetch_add(1, Ordering::SeqCst);
    s.stats.batch_sizes.lock().unwrap().push(n);
    let now = s.stats.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    s.stats.max_in_flight.fetch_max(now, Ordering::SeqCst);
    tokio::time::sleep(s.behavior.delay).await;
    s.stats.in_flight.fetch_sub(1, Ordering::SeqCst);
    if let Some(code) = s.behavior.always_status {
        return Err((StatusCode::from_u16(code).unwrap(), "configured failure".into()));
    }
    let left = s.behavior.fail_first.load(Ordering::SeqCst);
    if left > 0 {
        s.behavior.fail_first.store(left - 1, Ordering::SeqCst);
        return Err((StatusCode::SERVICE_UNAVAILABLE, "overloaded".into()));
    }
    Ok(())
}

fn scaled(s: &AppState, v: Vec<f32>) -> Vec<f32> {
    match s.behavior.scale {
        Some(f) => v.into_iter().map(|x| x * f).collect(),
        None => v,
    }
}

async fn embed_text(State(s): State<Arc<AppState>>, Json(body): Json<Value>) -> Reply {
    let Some(texts) = body.get("texts").and_then(Value::as_array) else {
        return Err((StatusCode::BAD_REQUEST, "texts missing".into()));
    };
    gate(&s, texts.len()).await?;
    let vectors: Vec<Vec<f32>> =
        texts.iter().map(|t| scaled(&s, text_embedding(t.as_str().unwrap_or(""), s.behavior.dim))).collect();
    Ok(Json(json!({ "vectors": vectors })))
}

async fn embed_image(State(s): State<Arc<AppState>>, Json(body): Json<Value>) -> Reply {
    let Some(images) = body.get("images").and_then(Value::as_array) else {
        return Err((StatusCode::BAD_REQUEST, "images missing".into()));
    };
    gate(&s, images.len()).await?;
    let mut vectors = Vec::new();
    for img in images {
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(img.as_str().unwrap_or(""))
            .map_err(|e| (StatusCode::BAD_REQUEST, e.to_string()))?;
        let rgb = image::load_from_memory(&bytes).map_err(|e| (StatusCode::BAD_REQUEST, e.to_string()))?.to_rgb8();
        let (w, h) = rgb.dimensions();
        let frame = Frame::new(0, 0.0, w, h, rgb.into_raw()).unwrap();
        vectors.push(scaled(&s, image_embedding(&frame, s.behavior.dim)));
    }
    Ok(Json(json!({ "vectors": vectors })))
}

pub fn spawn_server(behavior: ServerBehavior) -> TestServer {
    let stats = Arc::new(ServerStats::default());
    let state = Arc::new(AppState { behavior, stats: stats.clone() });
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
        rt.block_on(async move {
            let app = Router::new()
                .route("/v1/info", post(info))
                .route("/v1/embed_text", post(embed_text))
                .route("/v1/embed_image", post(embed_image))
                .with_state(state);
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    TestServer { url: format!("http://{addr}"), stats }
}

pub fn behavior(dim: usize) -> ServerBehavior {
    ServerBehavior { dim, ..Default::default() }
}
