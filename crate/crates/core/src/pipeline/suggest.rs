//! Configuration suggestions derived from evaluated runs.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Pipeline, PipelineConfig};
use super::metrics::EvalMetrics;
use super::optimize::{measured_costs, optimize_with};
use super::sweep::SweepRow;

/// Reorder when the optimized cost is below this share of the current one.
pub const REORDER_RATIO: f64 = 0.9;
/// Components passing at least this share of their input are removal
/// candidates.
pub const REMOVE_SELECTIVITY: f64 = 0.99;

/// One evaluated run, with any sweeps performed against the same config.
#[derive(Debug, Clone)]
pub struct RunEvidence {
    pub run_id: String,
    pub pipeline: Pipeline,
    pub metrics: EvalMetrics,
    /// `(component_id, param, rows)`
    pub sweeps: Vec<(String, String, Vec<SweepRow>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionKind {
    Reorder,
    Threshold,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub kind: SuggestionKind,
    /// Affected component; absent for whole-chain reorders.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component_id: Option<String>,
    pub message: String,
    pub impact: Value,
    /// Fingerprint of the config the suggestion was computed against; a
    /// client holding a different config should treat it as stale.
    pub base_config: String,
    pub proposed_config: PipelineConfig,
    pub evidence: Vec<String>,
}

/// FNV-1a over the canonical JSON form.
pub fn config_fingerprint(c: &PipelineConfig) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in c.to_json().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn dominates(row: &EvalMetrics, cur: &EvalMetrics) -> bool {
    row.precision >= cur.precision && row.recall >= cur.recall && row.reduction_rate > cur.reduction_rate
}

/// Suggestions for the most recent run in `history`, citing every run
/// whose evidence supports them.
pub fn suggest(history: &[RunEvidence]) -> Vec<Suggestion> {
    let Some(latest) = history.last() else {
        return Vec::new();
    };
    let p = &latest.pipeline;
    let base = config_fingerprint(&p.config);
    let same_config: Vec<String> = history
        .iter()
        .filter(|r| config_fingerprint(&r.pipeline.config) == base)
        .map(|r| r.run_id.clone())
        .collect();
    let mut out = Vec::new();

    if let Ok(report) = measured_costs(p, &latest.metrics).and_then(|t| optimize_with(p, &t)) {
        if report.ratio < REORDER_RATIO {
            out.push(Suggestion {
                kind: SuggestionKind::Reorder,
                component_id: None,
                message: format!(
                    "run components as {} to cut expected cost per item to {:.1}% of the current order",
                    report.order.join(", "),
                    report.ratio * 100.0
                ),
                impact: json!({
                    "original_cost": report.original_cost,
                    "optimized_cost": report.optimized_cost,
                    "ratio": report.ratio,
                    "order": report.order,
                }),
                base_config: base.clone(),
                proposed_config: report.config,
                evidence: same_config.clone(),
            });
        }
    }

    for (component, param, rows) in &latest.sweeps {
        let best = rows
            .iter()
            .filter(|r| dominates(&r.metrics, &latest.metrics))
            .max_by(|a, b| {
                a.metrics
                    .reduction_rate
                    .total_cmp(&b.metrics.reduction_rate)
                    .then_with(|| b.value.total_cmp(&a.value))
            });
        let Some(best) = best else { continue };
        let mut proposed = p.config.clone();
        if let Some(spec) = proposed.component_mut(component) {
            spec.params.insert(param.clone(), Value::from(best.value));
        }
        out.push(Suggestion {
            kind: SuggestionKind::Threshold,
            component_id: Some(component.clone()),
            message: format!(
                "set {component}.{param} to {}: precision {:.3}, recall {:.3}, reduction {:.3} (now {:.3}, {:.3}, {:.3})",
                best.value,
                best.metrics.precision,
                best.metrics.recall,
                best.metrics.reduction_rate,
                latest.metrics.precision,
                latest.metrics.recall,
                latest.metrics.reduction_rate
            ),
            impact: json!({
                "param": param,
                "value": best.value,
                "precision": best.metrics.precision,
                "recall": best.metrics.recall,
                "reduction_rate": best.metrics.reduction_rate,
                "reduction_gain": best.metrics.reduction_rate - latest.metrics.reduction_rate,
            }),
            base_config: base.clone(),
            proposed_config: proposed,
            evidence: vec![latest.run_id.clone()],
        });
    }

    for c in &latest.metrics.components {
        if c.input == 0 || c.selectivity < REMOVE_SELECTIVITY {
            continue;
        }
        // Geolocate feeds later geo filters; dropping it would break them.
        if p.precedence.iter().any(|&(a, _)| p.components[a].id == c.id) {
            continue;
        }
        let support: Vec<String> = history
            .iter()
            .filter(|r| {
                r.metrics
                    .components
                    .iter()
                    .any(|x| x.id == c.id && x.input > 0 && x.selectivity >= REMOVE_SELECTIVITY)
            })
            .map(|r| r.run_id.clone())
            .collect();
        let mut proposed = p.config.clone();
        proposed.components.retain(|s| s.id != c.id);
        proposed.cost_model.remove(&c.id);
        out.push(Suggestion {
            kind: SuggestionKind::Remove,
            component_id: Some(c.id.clone()),
            message: format!(
                "{} passed {} of {} items; removing it saves its cost without changing the output",
                c.id, c.passed, c.input
            ),
            impact: json!({
                "selectivity": c.selectivity,
                "mean_cost_ms": c.mean_cost_ms,
            }),
            base_config: base.clone(),
            proposed_config: proposed,
            evidence: support,
        });
    }
    out
}
