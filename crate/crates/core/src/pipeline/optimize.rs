//! Execution-order optimization for chains of filters.
//!
//! With per-item costs `c` and pass rates `s`, running the chain in order
//! `π` costs `Σ_i c_π(i) · Π_{j<i} s_π(j)` per input item.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{validate, ConfigError, Pipeline, PipelineConfig};
use super::metrics::EvalMetrics;

/// Largest number of movable components searched exhaustively.
pub const EXHAUSTIVE_MAX_FREE: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum OptimizeError {
    #[error("no cost data for component {0:?}: run the pipeline with profiling first, or declare cost_ms and selectivity in cost_model")]
    MissingCost(String),
    #[error("no order satisfies the precedence and pinning constraints")]
    Infeasible,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

pub fn expected_cost(costs: &[f64], selectivities: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut reach = 1.0;
    for (c, s) in costs.iter().zip(selectivities) {
        total += c * reach;
        reach *= s;
    }
    total
}

fn cost_of(order: &[usize], costs: &[f64], sels: &[f64]) -> f64 {
    let c: Vec<f64> = order.iter().map(|&i| costs[i]).collect();
    let s: Vec<f64> = order.iter().map(|&i| sels[i]).collect();
    expected_cost(&c, &s)
}

/// `c / (1 - s)`; components that filter nothing rank last.
pub fn rank(cost: f64, selectivity: f64) -> f64 {
    if selectivity >= 1.0 {
        f64::INFINITY
    } else {
        cost / (1.0 - selectivity)
    }
}

/// Unconstrained rank-rule order: ascending rank, ties by id.
pub fn rank_order(costs: &[f64], sels: &[f64], ids: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| {
        rank(costs[a], sels[a])
            .total_cmp(&rank(costs[b], sels[b]))
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    order
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraints {
    /// `(before, after)` index pairs.
    pub precedence: Vec<(usize, usize)>,
    /// Fixed position per component, if any.
    pub pinned: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exhaustive,
    RankRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSolution {
    pub order: Vec<usize>,
    pub cost: f64,
    pub method: Method,
}

fn respects(order: &[usize], precedence: &[(usize, usize)]) -> bool {
    let mut pos = vec![0; order.len()];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    precedence.iter().all(|&(a, b)| pos[a] < pos[b])
}

/// Lexicographic next permutation; false once the last one is reached.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).expect("exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Cheapest order under the constraints. The identity order is the
/// starting incumbent and only strictly cheaper orders replace it, so an
/// already optimal chain is left as is.
pub fn best_order(
    costs: &[f64],
    sels: &[f64],
    ids: &[String],
    c: &Constraints,
) -> Result<OrderSolution, OptimizeError> {
    let n = costs.len();
    let pinned = |i: usize| c.pinned.get(i).copied().flatten();
    let mut slots: Vec<usize> = (0..n).collect();
    let mut free: Vec<usize> = Vec::new();
    let mut layout: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        match pinned(i) {
            Some(p) if p < n && layout[p].is_none() => layout[p] = Some(i),
            Some(_) => return Err(OptimizeError::Infeasible),
            None => free.push(i),
        }
    }
    slots.retain(|&p| layout[p].is_none());
    let place = |perm: &[usize]| -> Vec<usize> {
        let mut order = layout.clone();
        for (&slot, &i) in slots.iter().zip(perm) {
            order[slot] = Some(i);
        }
        order.into_iter().map(|x| x.expect("filled")).collect()
    };

    if free.len() <= EXHAUSTIVE_MAX_FREE {
        let identity: Vec<usize> = (0..n).collect();
        let mut best: Option<(Vec<usize>, f64)> = None;
        if respects(&identity, &c.precedence) && (0..n).all(|i| pinned(i).is_none_or(|p| p == i)) {
            best = Some((identity.clone(), cost_of(&identity, costs, sels)));
        }
        let mut perm = free.clone();
        loop {
            let order = place(&perm);
            if respects(&order, &c.precedence) {
                let cost = cost_of(&order, costs, sels);
                if best.as_ref().is_none_or(|(_, b)| cost < *b - 1e-12) {
                    best = Some((order, cost));
                }
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        let (order, cost) = best.ok_or(OptimizeError::Infeasible)?;
        return Ok(OrderSolution {
            order,
            cost,
            method: Method::Exhaustive,
        });
    }

    // Greedy: fill free slots left to right with the lowest-rank component
    // whose predecessors are already placed.
    let mut placed = vec![false; n];
    let mut order: Vec<Option<usize>> = layout.clone();
    let mut remaining = free.clone();
    for slot in order.iter_mut() {
        if let Some(i) = *slot {
            if c.precedence.iter().any(|&(a, b)| b == i && !placed[a]) {
                return Err(OptimizeError::Infeasible);
            }
            placed[i] = true;
            continue;
        }
        let ready = remaining
            .iter()
            .copied()
            .filter(|&i| c.precedence.iter().all(|&(a, b)| b != i || placed[a]))
            .min_by(|&a, &b| {
                rank(costs[a], sels[a])
                    .total_cmp(&rank(costs[b], sels[b]))
                    .then_with(|| ids[a].cmp(&ids[b]))
            })
            .ok_or(OptimizeError::Infeasible)?;
        remaining.retain(|&i| i != ready);
        placed[ready] = true;
        *slot = Some(ready);
    }
    let order: Vec<usize> = order.into_iter().map(|x| x.expect("filled")).collect();
    Ok(OrderSolution {
        cost: cost_of(&order, costs, sels),
        order,
        method: Method::RankRule,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub original_order: Vec<String>,
    pub order: Vec<String>,
    pub config: PipelineConfig,
    pub original_cost: f64,
    pub optimized_cost: f64,
    /// optimized / original (1 when the original cost is 0).
    pub ratio: f64,
    pub method: Method,
}

/// Per-component `(cost_ms, selectivity)` in chain order.
pub type CostTable = Vec<(f64, f64)>;

pub fn declared_costs(p: &Pipeline) -> Result<CostTable, OptimizeError> {
    p.components
        .iter()
        .map(|c| match p.config.cost_model.get(&c.id) {
            Some(e) => e
                .selectivity
                .map(|s| (e.cost_ms, s))
                .ok_or_else(|| OptimizeError::MissingCost(c.id.clone())),
            None => Err(OptimizeError::MissingCost(c.id.clone())),
        })
        .collect()
}

/// Costs from a run's metrics, falling back to declared entries for
/// components the run did not measure.
pub fn measured_costs(p: &Pipeline, m: &EvalMetrics) -> Result<CostTable, OptimizeError> {
    p.components
        .iter()
        .map(|c| {
            let declared = p.config.cost_model.get(&c.id);
            let run = m.components.iter().find(|x| x.id == c.id && x.input > 0);
            let cost = run
                .map(|r| r.mean_cost_ms)
                .or(declared.map(|d| d.cost_ms))
                .ok_or_else(|| OptimizeError::MissingCost(c.id.clone()))?;
            let sel = run
                .map(|r| r.selectivity)
                .or(declared.and_then(|d| d.selectivity))
                .ok_or_else(|| OptimizeError::MissingCost(c.id.clone()))?;
            Ok((cost, sel))
        })
        .collect()
}

/// Stateful components (dedup, density) stay where they are unless an
/// explicit pin says otherwise.
pub fn constraints(p: &Pipeline) -> Constraints {
    Constraints {
        precedence: p.precedence.clone(),
        pinned: p
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                p.config.components[i]
                    .pinned
                    .or_else(|| c.kind.is_stateful().then_some(i))
            })
            .collect(),
    }
}

pub fn optimize_with(p: &Pipeline, table: &CostTable) -> Result<OptimizeReport, OptimizeError> {
    let costs: Vec<f64> = table.iter().map(|t| t.0).collect();
    let sels: Vec<f64> = table.iter().map(|t| t.1).collect();
    let ids = p.ids();
    let sol = best_order(&costs, &sels, &ids, &constraints(p))?;
    let original_cost = expected_cost(&costs, &sels);
    let mut config = p.config.clone();
    config.components = sol.order.iter().map(|&i| p.config.components[i].clone()).collect();
    validate(config.clone())?;
    Ok(OptimizeReport {
        original_order: ids.clone(),
        order: sol.order.iter().map(|&i| ids[i].clone()).collect(),
        config,
        original_cost,
        optimized_cost: sol.cost,
        ratio: if original_cost > 0.0 {
            sol.cost / original_cost
        } else {
            1.0
        },
        method: sol.method,
    })
}

/// Reorders a pipeline using its declared cost model.
pub fn optimize_order(p: &Pipeline) -> Result<OptimizeReport, OptimizeError> {
    optimize_with(p, &declared_costs(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn formula_examples() {
        assert_eq!(expected_cost(&[3.0], &[0.4]), 3.0);
        assert_eq!(expected_cost(&[1.0, 2.0], &[0.5, 0.3]), 2.0);
        assert!((expected_cost(&[2.0, 1.0], &[0.1, 0.5]) - 2.1).abs() < 1e-15);
    }

    #[test]
    fn two_filter_choice() {
        let s = best_order(&[1.0, 2.0], &[0.5, 0.1], &ids(2), &Constraints::default()).unwrap();
        assert_eq!(s.order, [0, 1]);
        assert_eq!(s.cost, 2.0);
    }

    #[test]
    fn precedence_dominates() {
        let c = Constraints {
            precedence: vec![(1, 0)],
            pinned: vec![],
        };
        let s = best_order(&[1.0, 2.0], &[0.5, 0.1], &ids(2), &c).unwrap();
        assert_eq!(s.order, [1, 0]);
    }

    #[test]
    fn pinned_stays() {
        let c = Constraints {
            precedence: vec![],
            pinned: vec![Some(0), None, None],
        };
        let s = best_order(&[10.0, 5.0, 1.0], &[0.9, 0.8, 0.2], &ids(3), &c).unwrap();
        assert_eq!(s.order, [0, 2, 1]);
    }

    #[test]
    fn next_permutation_enumerates_all() {
        let mut v = vec![0, 1, 2, 3];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 24);
    }
}
