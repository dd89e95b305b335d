//! Configurable filter chains: configuration, execution, evaluation
//! against labeled samples, threshold sweeps, order optimization and
//! suggestions.

pub mod artifacts;
pub mod config;
pub mod engine;
pub mod metrics;
pub mod optimize;
pub mod suggest;
pub mod sweep;

pub use config::{
    case_study_config, component_descriptors, parse_config, validate, Component, ComponentDescriptor,
    ComponentKind, ComponentSpec, ConfigError, CostEntry, Pipeline, PipelineConfig,
};
pub use engine::{run, ComponentStats, Engine, Fate, Flag, ItemRecord, RemovalReason, RunError, RunRecord};
pub use metrics::{evaluate, ComponentMetrics, CostSource, EvalMetrics};
pub use optimize::{
    best_order, declared_costs, expected_cost, measured_costs, optimize_order, optimize_with, rank,
    rank_order, Constraints, Method, OptimizeError, OptimizeReport, OrderSolution,
};
pub use suggest::{suggest, RunEvidence, Suggestion, SuggestionKind};
pub use sweep::{default_grid, sweep, SweepError, SweepRow};
