//! Asynchronous pipeline runs on a bounded worker pool.

use std::path::Path;

use chrono::Utc;
use serde::{Deserialize, Serialize};

use geopulse_core::pipeline::{
    artifacts, default_grid, evaluate, suggest, sweep, validate, Engine, PipelineConfig, RunEvidence, Suggestion,
    SweepRow,
};

use crate::error::ApiError;
use crate::store::{executable, DataRoot, RunRegistry, RunState, SWEEPS};
use crate::AppState;

/// Threshold sweep recorded alongside a run, used as suggestion evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSet {
    pub component_id: String,
    pub param: String,
    pub rows: Vec<SweepRow>,
}

/// Executes a run into `out`: the record, metrics against the corpus
/// sample when there is one, and threshold sweeps of every scored
/// component.
pub fn execute(data: &DataRoot, corpus_id: &str, config: PipelineConfig, out: &Path) -> Result<(), ApiError> {
    let corpus = data.open_corpus(corpus_id)?;
    let (pipeline, exec) = executable(config, &corpus.root)?;
    let mut engine = Engine::new(&corpus);
    let mut record = engine.run(&exec)?;
    record.config = pipeline.config.clone();
    let sample = data.sample(&corpus, None).ok();
    let metrics = sample.as_ref().map(|s| evaluate(&record, s));
    artifacts::write_run(out, &record, metrics.as_ref()).map_err(|e| ApiError::internal(e.to_string()))?;

    if let Some(sample) = &sample {
        let mut sets = Vec::new();
        for c in &exec.components {
            if c.kind.threshold().is_none() {
                continue;
            }
            let rows = sweep(&mut engine, &exec, sample, &c.id, "threshold", &default_grid())?;
            sets.push(SweepSet {
                component_id: c.id.clone(),
                param: "threshold".into(),
                rows,
            });
        }
        let raw = serde_json::to_vec_pretty(&sets).map_err(|e| ApiError::internal(e.to_string()))?;
        std::fs::write(out.join(SWEEPS), raw).map_err(|e| ApiError::internal(e.to_string()))?;
    }
    Ok(())
}

/// Registers a run and schedules it; returns the new run id immediately.
pub fn start(state: &AppState, corpus_id: String, config: PipelineConfig) -> Result<String, ApiError> {
    let st = state
        .registry
        .create(&corpus_id, &config)
        .map_err(|e| ApiError::internal(format!("cannot register run: {e}")))?;
    let run_id = st.run_id.clone();
    let state = state.clone();
    let id = run_id.clone();
    tokio::spawn(async move {
        let Ok(_permit) = state.slots.clone().acquire_owned().await else {
            return;
        };
        let reg = state.registry.clone();
        if let Err(e) = reg.update(&id, |s| {
            s.status = RunState::Running;
            s.started_at = Some(Utc::now());
        }) {
            log::error!("run {id}: {e}");
            return;
        }
        let data = state.data.clone();
        let out = reg.run_dir(&id);
        let job = tokio::task::spawn_blocking(move || execute(&data, &corpus_id, config, &out)).await;
        let outcome = match job {
            Ok(r) => r.map_err(|e| e.message),
            Err(e) => Err(format!("run task panicked: {e}")),
        };
        let res = reg.update(&id, |s| {
            s.finished_at = Some(Utc::now());
            match outcome {
                Ok(()) => s.status = RunState::Done,
                Err(msg) => {
                    s.status = RunState::Failed;
                    s.error = Some(msg);
                }
            }
        });
        if let Err(e) = res {
            log::error!("run {id}: {e}");
        }
    });
    Ok(run_id)
}

/// Finished run's directory, or 404 / 409.
pub fn finished_dir(registry: &RunRegistry, run_id: &str) -> Result<std::path::PathBuf, ApiError> {
    let st = registry
        .get(run_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown run {run_id:?}")))?;
    match st.status {
        RunState::Done => Ok(registry.run_dir(run_id)),
        RunState::Failed => Err(ApiError::conflict(format!(
            "run {run_id} failed: {}",
            st.error.unwrap_or_default()
        ))),
        _ => Err(ApiError::conflict(format!("run {run_id} has not finished yet"))),
    }
}

fn evidence(registry: &RunRegistry, run_id: &str) -> Result<Option<RunEvidence>, ApiError> {
    let dir = registry.run_dir(run_id);
    let io = |e: std::io::Error| ApiError::internal(e.to_string());
    let Some(metrics) = artifacts::read_metrics(&dir).map_err(io)? else {
        return Ok(None);
    };
    let config: PipelineConfig = artifacts::read_json(&dir.join(artifacts::CONFIG)).map_err(io)?;
    let sweeps_path = dir.join(SWEEPS);
    let sweeps: Vec<SweepSet> = if sweeps_path.exists() {
        artifacts::read_json(&sweeps_path).map_err(io)?
    } else {
        Vec::new()
    };
    Ok(Some(RunEvidence {
        run_id: run_id.into(),
        pipeline: validate(config)?,
        metrics,
        sweeps: sweeps.into_iter().map(|s| (s.component_id, s.param, s.rows)).collect(),
    }))
}

/// Suggestions for `run_id`, with earlier finished runs on the same corpus
/// as supporting history.
pub fn suggestions(registry: &RunRegistry, run_id: &str) -> Result<Vec<Suggestion>, ApiError> {
    finished_dir(registry, run_id)?;
    let target = registry.get(run_id).expect("checked above");
    let mut history = Vec::new();
    for st in registry.list() {
        if st.seq > target.seq || st.corpus_id != target.corpus_id || st.status != RunState::Done {
            continue;
        }
        if let Some(ev) = evidence(registry, &st.run_id)? {
            history.push(ev);
        }
    }
    if history.last().map(|h| h.run_id.as_str()) != Some(run_id) {
        return Err(ApiError::conflict(format!(
            "run {run_id} has no metrics: its corpus has no labeled sample"
        )));
    }
    Ok(suggest(&history))
}

