use std::collections::BTreeMap;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::Json;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use geopulse_core::aggregate::{aggregate, export_choropleth, spearman, totals, BucketWidth};
use geopulse_core::ingest::layout;
use geopulse_core::model::parse_utc;
use geopulse_core::pipeline::{
    artifacts, component_descriptors, declared_costs, default_grid, evaluate, measured_costs, optimize_with, sweep,
    Engine,
};
use geopulse_core::trigger::{bucket_term_counts, evaluate_loeo, Dictionary, LoeoOptions, DEFAULT_BUCKET_SECS};

use crate::error::ApiError;
use crate::runs;
use crate::store::{executable, parse_client_config};
use crate::AppState;

type ApiResult = Result<Json<Value>, ApiError>;
type Params = Query<BTreeMap<String, String>>;

fn body<T: DeserializeOwned>(raw: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(raw).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn to_json(v: impl serde::Serialize) -> ApiResult {
    serde_json::to_value(v)
        .map(Json)
        .map_err(|e| ApiError::internal(e.to_string()))
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker task failed: {e}")))?
}

fn required<'a>(q: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str, ApiError> {
    q.get(key)
        .map(String::as_str)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ApiError::bad_request(format!("missing query parameter {key:?}")))
}

pub async fn components() -> ApiResult {
    to_json(component_descriptors())
}

pub async fn corpora(State(s): State<AppState>) -> ApiResult {
    let list: Vec<Value> = s
        .data
        .corpus_ids()
        .into_iter()
        .map(|id| {
            let dir = s.data.root.join(crate::store::CORPORA).join(&id);
            let has = |f: &str| dir.join(f).is_file();
            json!({
                "corpus_id": id,
                "sample": has(layout::SAMPLE),
                "events": has(layout::EVENTS),
                "gazetteer": has(layout::GAZETTEER),
                "regions": has(layout::REGIONS),
                "impact": has(layout::IMPACT),
            })
        })
        .collect();
    Ok(Json(Value::Array(list)))
}

pub async fn dictionaries(State(s): State<AppState>) -> ApiResult {
    to_json(s.data.dictionary_ids())
}

#[derive(Deserialize)]
struct EvaluateRequest {
    config: Value,
    corpus_id: Option<String>,
    sample_id: Option<String>,
}

pub async fn pipeline_evaluate(State(s): State<AppState>, raw: Bytes) -> ApiResult {
    let req: EvaluateRequest = body(&raw)?;
    let config = parse_client_config(&req.config)?;
    let corpus_id = s.data.pick_corpus(req.corpus_id.as_deref(), Some(&config))?;
    let metrics = blocking(move || {
        let corpus = s.data.open_corpus(&corpus_id)?;
        let sample = s.data.sample(&corpus, req.sample_id.as_deref().or(config.sample.as_deref()))?;
        let (_, exec) = executable(config, &corpus.root)?;
        let record = Engine::new(&corpus).run(&exec)?;
        Ok(evaluate(&record, &sample))
    })
    .await?;
    to_json(metrics)
}

#[derive(Deserialize)]
struct SweepRequest {
    config: Value,
    component_id: String,
    param: String,
    grid: Option<Vec<f64>>,
    corpus_id: Option<String>,
    sample_id: Option<String>,
}

pub async fn pipeline_sweep(State(s): State<AppState>, raw: Bytes) -> ApiResult {
    let req: SweepRequest = body(&raw)?;
    let config = parse_client_config(&req.config)?;
    let corpus_id = s.data.pick_corpus(req.corpus_id.as_deref(), Some(&config))?;
    let current = config
        .component(&req.component_id)
        .and_then(|c| c.params.get(&req.param).cloned());
    let (component_id, param) = (req.component_id.clone(), req.param.clone());
    let rows = blocking(move || {
        let corpus = s.data.open_corpus(&corpus_id)?;
        let sample = s.data.sample(&corpus, req.sample_id.as_deref().or(config.sample.as_deref()))?;
        let (_, exec) = executable(config, &corpus.root)?;
        let grid = req.grid.unwrap_or_else(default_grid);
        let mut engine = Engine::new(&corpus);
        Ok(sweep(&mut engine, &exec, &sample, &req.component_id, &req.param, &grid)?)
    })
    .await?;
    Ok(Json(json!({
        "component_id": component_id,
        "param": param,
        "current": current,
        "rows": rows,
    })))
}

#[derive(Deserialize)]
struct OptimizeRequest {
    config: Value,
    /// Use this finished run's measured costs instead of the declared ones.
    run_id: Option<String>,
}

pub async fn pipeline_optimize(State(s): State<AppState>, raw: Bytes) -> ApiResult {
    let req: OptimizeRequest = body(&raw)?;
    let config = parse_client_config(&req.config)?;
    let pipeline = geopulse_core::pipeline::validate(config)?;
    let table = match &req.run_id {
        None => declared_costs(&pipeline)?,
        Some(id) => {
            let dir = runs::finished_dir(&s.registry, id)?;
            let metrics = artifacts::read_metrics(&dir)
                .map_err(|e| ApiError::internal(e.to_string()))?
                .ok_or_else(|| ApiError::conflict(format!("run {id} has no metrics")))?;
            measured_costs(&pipeline, &metrics)?
        }
    };
    to_json(optimize_with(&pipeline, &table)?)
}

#[derive(Deserialize)]
struct RunRequest {
    config: Value,
    corpus_id: Option<String>,
}

pub async fn pipeline_run(State(s): State<AppState>, raw: Bytes) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req: RunRequest = body(&raw)?;
    let config = parse_client_config(&req.config)?;
    let corpus_id = s.data.pick_corpus(req.corpus_id.as_deref(), Some(&config))?;
    let dir = s.data.corpus_dir(&corpus_id)?;
    executable(config.clone(), &dir)?;
    let run_id = runs::start(&s, corpus_id, config)?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "run_id": run_id }))))
}

pub async fn list_runs(State(s): State<AppState>) -> ApiResult {
    to_json(s.registry.list())
}

pub async fn get_run(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let st = s
        .registry
        .get(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown run {id:?}")))?;
    let dir = s.registry.run_dir(&id);
    let io = |e: std::io::Error| ApiError::internal(e.to_string());
    let config: Value = artifacts::read_json(&dir.join(artifacts::CONFIG)).map_err(io)?;
    let mut out = serde_json::to_value(&st).map_err(|e| ApiError::internal(e.to_string()))?;
    out["config"] = config;
    if st.status == crate::store::RunState::Done {
        let summary: artifacts::RunSummary = artifacts::read_json(&dir.join(artifacts::SUMMARY)).map_err(io)?;
        out["summary"] = serde_json::to_value(summary).map_err(|e| ApiError::internal(e.to_string()))?;
        out["metrics"] = serde_json::to_value(artifacts::read_metrics(&dir).map_err(io)?)
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let mut files: Vec<String> = std::fs::read_dir(&dir)
            .map_err(io)?
            .filter_map(|e| e.ok()?.file_name().into_string().ok())
            .collect();
        files.sort();
        out["artifacts"] = json!(files);
    }
    Ok(Json(out))
}

fn bucket_secs(q: &BTreeMap<String, String>) -> Result<i64, ApiError> {
    match q.get("bucket").map(String::as_str) {
        None | Some("") | Some("hour") => Ok(DEFAULT_BUCKET_SECS),
        Some("day") => Ok(86_400),
        Some(n) => n
            .parse::<i64>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| ApiError::bad_request(format!("bucket {n:?}: expected hour, day or seconds"))),
    }
}

fn time_param(q: &BTreeMap<String, String>, key: &str) -> Result<Option<chrono::DateTime<chrono::Utc>>, ApiError> {
    match q.get(key).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(s) => parse_utc(s)
            .map(Some)
            .ok_or_else(|| ApiError::bad_request(format!("{key}: expected a UTC timestamp like 2021-06-01T00:00:00Z"))),
    }
}

/// `term` is a comma-separated list (or use `dictionary_id`). `from`/`to`
/// default to the corpus span and are widened to bucket boundaries.
pub async fn trigger_series(State(s): State<AppState>, Query(q): Params) -> ApiResult {
    let bucket = bucket_secs(&q)?;
    let from = time_param(&q, "from")?;
    let to = time_param(&q, "to")?;
    let dictionary = match (q.get("term").filter(|t| !t.is_empty()), q.get("dictionary_id")) {
        (Some(t), _) => Dictionary::seeds_only("", t.split(',').map(str::to_string).collect()),
        (None, Some(id)) => s.data.dictionary(id)?,
        (None, None) => return Err(ApiError::bad_request("missing query parameter \"term\"")),
    };
    let corpus_id = s.data.pick_corpus(q.get("corpus_id").map(String::as_str), None)?;
    let series = blocking(move || {
        let corpus = s.data.open_corpus(&corpus_id)?;
        let covering =
            geopulse_core::trigger::Span::covering(corpus.posts.iter().map(|p| &p.created_at), bucket);
        let floor = |t: i64| t - t.rem_euclid(bucket);
        let (lo, hi) = match (from, to, covering) {
            (Some(f), Some(t), _) => (f.timestamp(), t.timestamp()),
            (f, t, Some(c)) => (
                f.map_or(c.origin.timestamp(), |v| v.timestamp()),
                t.map_or(c.end.timestamp(), |v| v.timestamp()),
            ),
            (_, _, None) => return Ok(Vec::new()),
        };
        let lo = floor(lo);
        let hi = if hi.rem_euclid(bucket) == 0 { hi } else { floor(hi) + bucket };
        let at = |t| chrono::DateTime::from_timestamp(t, 0).ok_or_else(|| ApiError::bad_request("time out of range"));
        Ok(bucket_term_counts(&corpus.posts, &dictionary, bucket, (at(lo)?, at(hi)?))?)
    })
    .await?;
    to_json(series)
}

pub async fn trigger_events(State(s): State<AppState>, Query(q): Params) -> ApiResult {
    let corpus_id = s.data.pick_corpus(q.get("corpus_id").map(String::as_str), None)?;
    let corpus = s.data.open_corpus(&corpus_id)?;
    to_json(corpus.events()?)
}

#[derive(Deserialize)]
struct LoeoRequest {
    dictionary_id: String,
    #[serde(rename = "W", alias = "window")]
    window: Option<usize>,
    bucket_secs: Option<i64>,
    negative_ratio: Option<usize>,
    corpus_id: Option<String>,
}

pub async fn trigger_evaluate(State(s): State<AppState>, raw: Bytes) -> ApiResult {
    let req: LoeoRequest = body(&raw)?;
    let dictionary = s.data.dictionary(&req.dictionary_id)?;
    let corpus_id = s.data.pick_corpus(req.corpus_id.as_deref(), None)?;
    let defaults = LoeoOptions::default();
    let options = LoeoOptions {
        window: req.window.unwrap_or(defaults.window),
        bucket_secs: req.bucket_secs.unwrap_or(defaults.bucket_secs),
        negative_ratio: req.negative_ratio.unwrap_or(defaults.negative_ratio),
        ..defaults
    };
    let report = blocking(move || {
        let corpus = s.data.open_corpus(&corpus_id)?;
        let events = corpus.events()?;
        Ok(evaluate_loeo(&corpus.posts, &events, &dictionary, &options)?)
    })
    .await?;
    to_json(report)
}

/// Choropleth of a finished run. When the corpus ships reference impact
/// figures, `metadata` also carries them and the rank correlation of the
/// per-region counts against them.
pub async fn aggregate_run(State(s): State<AppState>, Query(q): Params) -> ApiResult {
    let run_id = required(&q, "run_id")?.to_string();
    let width: BucketWidth = match q.get("bucket").filter(|b| !b.is_empty()) {
        None => BucketWidth::Day,
        Some(b) => b.parse().map_err(ApiError::bad_request)?,
    };
    let dir = runs::finished_dir(&s.registry, &run_id)?;
    let corpus_id = s.registry.get(&run_id).expect("finished").corpus_id;
    blocking(move || {
        let corpus = s.data.open_corpus(&corpus_id)?;
        if !corpus.root.join(layout::REGIONS).is_file() {
            return Err(ApiError::not_found(format!("corpus {corpus_id} has no {}", layout::REGIONS)));
        }
        let regions = corpus.regions()?;
        let resolutions = artifacts::read_resolutions(&dir).map_err(|e| ApiError::internal(e.to_string()))?;
        let rows = aggregate(&resolutions, &regions, width);
        let mut geo = export_choropleth(&rows, &regions);
        geo["metadata"]["run_id"] = json!(run_id);
        geo["metadata"]["bucket"] = json!(width);
        if corpus.root.join(layout::IMPACT).is_file() {
            let impact = corpus.impact()?;
            let counts: BTreeMap<String, f64> = regions
                .iter()
                .map(|r| (r.region_id.clone(), 0.0))
                .chain(totals(&rows).into_iter().map(|(k, v)| (k, v as f64)))
                .filter(|(k, _)| k != geopulse_core::aggregate::UNASSIGNED)
                .collect();
            geo["metadata"]["impact"] = json!(impact.affected);
            geo["metadata"]["spearman"] = match spearman(&counts, &impact.affected) {
                Ok(sp) => json!(sp),
                Err(e) => json!({ "error": e.to_string() }),
            };
        }
        Ok(Json(geo))
    })
    .await
}

pub async fn suggestions(State(s): State<AppState>, Query(q): Params) -> ApiResult {
    let run_id = required(&q, "run_id")?.to_string();
    let list = blocking(move || runs::suggestions(&s.registry, &run_id)).await?;
    to_json(list)
}

pub async fn fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}
