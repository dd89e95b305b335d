//! HTTP service over the geopulse engine: synchronous evaluate, sweep and
//! optimize calls, asynchronous runs with a persistent registry, trigger
//! series and evaluation, aggregation and suggestions.

mod api;
pub mod error;
pub mod runs;
pub mod store;

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

pub use error::ApiError;
use store::{DataRoot, RunRegistry};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_RUNS: usize = 2;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_root: PathBuf,
    /// Upper bound on concurrently executing runs.
    pub max_runs: usize,
    /// Origin allowed by CORS; any origin when unset.
    pub ui_origin: Option<String>,
    /// Directory served at `/` (the designer UI build), if any.
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(data_root: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_root: data_root.into(),
            max_runs: DEFAULT_MAX_RUNS,
            ui_origin: None,
            static_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub data: DataRoot,
    pub registry: Arc<RunRegistry>,
    pub slots: Arc<Semaphore>,
}

impl AppState {
    pub fn open(config: &ServiceConfig) -> io::Result<Self> {
        let data = DataRoot::new(&config.data_root);
        let registry = RunRegistry::open(data.runs_dir())?;
        Ok(AppState {
            data,
            registry: Arc::new(registry),
            slots: Arc::new(Semaphore::new(config.max_runs.max(1))),
        })
    }
}

fn cors(origin: Option<&str>) -> io::Result<CorsLayer> {
    let allow = match origin {
        None => AllowOrigin::any(),
        Some(o) => AllowOrigin::exact(
            HeaderValue::from_str(o).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?,
        ),
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]))
}

pub fn router(config: &ServiceConfig) -> io::Result<Router> {
    let state = AppState::open(config)?;
    let api = Router::new()
        .route("/api/components", get(api::components))
        .route("/api/corpora", get(api::corpora))
        .route("/api/dictionaries", get(api::dictionaries))
        .route("/api/pipeline/evaluate", post(api::pipeline_evaluate))
        .route("/api/pipeline/sweep", post(api::pipeline_sweep))
        .route("/api/pipeline/optimize", post(api::pipeline_optimize))
        .route("/api/pipeline/run", post(api::pipeline_run))
        .route("/api/runs", get(api::list_runs))
        .route("/api/runs/{id}", get(api::get_run))
        .route("/api/trigger/series", get(api::trigger_series))
        .route("/api/trigger/events", get(api::trigger_events))
        .route("/api/trigger/evaluate", post(api::trigger_evaluate))
        .route("/api/aggregate", get(api::aggregate_run))
        .route("/api/suggestions", get(api::suggestions))
        .route("/api/{*rest}", axum::routing::any(api::fallback))
        .with_state(state);
    let app = match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(api::fallback),
    };
    Ok(app.layer(cors(config.ui_origin.as_deref())?))
}

/// Serves until the process is stopped.
pub async fn serve(config: ServiceConfig, port: u16) -> io::Result<()> {
    let app = router(&config)?;
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {addr}, data root {}", config.data_root.display());
    axum::serve(listener, app).await
}
