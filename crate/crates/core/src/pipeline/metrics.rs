use serde::{Deserialize, Serialize};

use super::engine::RunRecord;
use super::optimize::expected_cost;
use crate::model::LabeledSample;
use crate::stats::Confusion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostSource {
    Measured,
    Declared,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMetrics {
    pub id: String,
    pub input: usize,
    pub passed: usize,
    pub removed: usize,
    pub flagged: usize,
    pub selectivity: f64,
    pub mean_cost_ms: f64,
    pub cost_source: CostSource,
}

/// Quality and cost of one run against a labeled sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    /// 1.0 when no labeled item is kept; see `nothing_kept`.
    pub precision: f64,
    /// 1.0 when the sample has no relevant item among the run's items.
    pub recall: f64,
    pub reduction_rate: f64,
    pub total: usize,
    pub kept: usize,
    pub removed: usize,
    pub flagged: usize,
    /// No labeled item was kept, so precision is undefined and reported as 1.
    pub nothing_kept: bool,
    pub labeled: usize,
    pub confusion: Confusion,
    pub components: Vec<ComponentMetrics>,
    pub expected_cost_per_item: f64,
}

impl EvalMetrics {
    /// Copy with wall-clock fields zeroed, for comparing runs.
    pub fn without_timings(&self) -> EvalMetrics {
        let mut m = self.clone();
        for c in &mut m.components {
            if c.cost_source == CostSource::Measured {
                c.mean_cost_ms = 0.0;
            }
        }
        m.expected_cost_per_item = 0.0;
        m
    }
}

/// Precision and recall over labeled items; unlabeled items only count
/// towards the reduction rate.
pub fn evaluate(run: &RunRecord, sample: &LabeledSample) -> EvalMetrics {
    let mut confusion = Confusion::default();
    let mut kept = 0;
    let mut flagged = 0;
    for r in &run.items {
        let out = r.in_output();
        if out {
            kept += 1;
        }
        if matches!(r.fate, super::engine::Fate::Flagged) {
            flagged += 1;
        }
        if let Some(rel) = sample.label(&r.post_id) {
            confusion.record(out, rel);
        }
    }
    let total = run.items.len();
    let components: Vec<ComponentMetrics> = run
        .components
        .iter()
        .map(|s| {
            let declared = run.config.cost_model.get(&s.id);
            let (mean_cost_ms, cost_source) = if s.input > 0 {
                (s.mean_cost_ms, CostSource::Measured)
            } else if let Some(d) = declared {
                (d.cost_ms, CostSource::Declared)
            } else {
                (0.0, CostSource::Missing)
            };
            ComponentMetrics {
                id: s.id.clone(),
                input: s.input,
                passed: s.passed,
                removed: s.removed,
                flagged: s.flagged,
                selectivity: s.selectivity,
                mean_cost_ms,
                cost_source,
            }
        })
        .collect();
    let costs: Vec<f64> = components.iter().map(|c| c.mean_cost_ms).collect();
    let sels: Vec<f64> = components.iter().map(|c| c.selectivity).collect();
    EvalMetrics {
        precision: confusion.precision().unwrap_or(1.0),
        recall: confusion.recall().unwrap_or(1.0),
        reduction_rate: if total == 0 {
            0.0
        } else {
            1.0 - kept as f64 / total as f64
        },
        total,
        kept,
        removed: total - kept,
        flagged,
        nothing_kept: confusion.tp + confusion.fp == 0,
        labeled: confusion.total() as usize,
        confusion,
        expected_cost_per_item: expected_cost(&costs, &sels),
        components,
    }
}
