//! Parameter sweeps: one evaluation per grid value, sharing the engine's
//! caches so only the affected suffix of the chain is recomputed.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::config::{validate, ConfigError, Pipeline};
use super::engine::{Engine, RunError};
use super::metrics::{evaluate, EvalMetrics};
use crate::model::LabeledSample;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("no component {0:?} in the pipeline")]
    UnknownComponent(String),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("at {param}={value}: {source}")]
    Config {
        param: String,
        value: f64,
        #[source]
        source: ConfigError,
    },
    #[error(transparent)]
    Run(#[from] RunError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: EvalMetrics,
}

/// `0, 0.05, ..., 1`.
pub fn default_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

pub fn sweep(
    engine: &mut Engine,
    pipeline: &Pipeline,
    sample: &LabeledSample,
    component_id: &str,
    param: &str,
    grid: &[f64],
) -> Result<Vec<SweepRow>, SweepError> {
    if pipeline.position(component_id).is_none() {
        return Err(SweepError::UnknownComponent(component_id.into()));
    }
    if grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &value in grid {
        let mut config = pipeline.config.clone();
        let spec = config.component_mut(component_id).expect("checked above");
        let v = if param == "max_distance" || param == "min_pts" {
            Value::from(value.round() as i64)
        } else {
            Value::from(value)
        };
        spec.params.insert(param.into(), v);
        let p = validate(config).map_err(|source| SweepError::Config {
            param: param.into(),
            value,
            source,
        })?;
        let record = engine.run(&p)?;
        rows.push(SweepRow {
            value,
            metrics: evaluate(&record, sample),
        });
    }
    Ok(rows)
}
