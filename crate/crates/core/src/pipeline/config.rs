//! Pipeline configuration: a JSON document listing components in execution
//! order with their parameters, ordering constraints and cost model.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geo::Weights;
use crate::media::{Direction, ScorerBinding, ScorerError, DEFAULT_MAX_DISTANCE};

pub const DEDUP: &str = "dedup";
pub const PHOTO: &str = "photo";
pub const NSFW: &str = "nsfw";
pub const GEOLOCATE: &str = "geolocate";
pub const GEOMETRY: &str = "geometry";
pub const DENSITY: &str = "density";
pub const REGISTERED: [&str; 6] = [DEDUP, PHOTO, NSFW, GEOLOCATE, GEOMETRY, DENSITY];

pub const DEFAULT_FAILURE_BUDGET: f64 = 0.1;
/// Parameters naming files.
pub const FILE_PARAMS: [&str; 2] = ["gazetteer", "regions"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostEntry {
    pub cost_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selectivity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
    /// Required 0-based position in the chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinned: Option<usize>,
    /// Components that must run before this one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub precedence: Vec<String>,
    /// Scorer override for `photo`/`nsfw`, required for custom ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer: Option<ScorerBinding>,
}

impl ComponentSpec {
    pub fn new(id: &str) -> Self {
        ComponentSpec {
            id: id.into(),
            params: BTreeMap::new(),
            pinned: None,
            precedence: Vec::new(),
            scorer: None,
        }
    }

    pub fn with_param(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.params.insert(name.into(), v.into());
        self
    }
}

fn default_budget() -> f64 {
    DEFAULT_FAILURE_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<String>,
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cost_model: BTreeMap<String, CostEntry>,
    /// Largest tolerated share of scorer transport failures per component.
    #[serde(default = "default_budget")]
    pub failure_budget: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration syntax: {0}")]
    Syntax(String),
    #[error("unknown component_id {0:?}: registered ids are dedup, photo, nsfw, geolocate, geometry, density; other ids need a \"scorer\" binding")]
    UnknownComponent(String),
    #[error("component {0:?} listed twice")]
    DuplicateComponent(String),
    #[error("component {component:?}: unknown parameter {param:?}")]
    UnknownParam { component: String, param: String },
    #[error("component {component:?}: parameter {param:?} {message}")]
    BadParam {
        component: String,
        param: String,
        message: String,
    },
    #[error("component {component:?}: threshold {value} out of range [0, 1]")]
    ThresholdRange { component: String, value: f64 },
    #[error("component {component:?}: precedence refers to unknown component {target:?}")]
    UnknownPrecedence { component: String, target: String },
    #[error("precedence cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("component {component:?} must run after {before:?} but is listed first")]
    OrderViolation { component: String, before: String },
    #[error("component {component:?}: {message}")]
    Pinned { component: String, message: String },
    #[error("component {0:?} needs a geolocate component earlier in the chain")]
    MissingGeolocate(String),
    #[error("component {component:?} does not accept a scorer binding")]
    UnexpectedScorer { component: String },
    #[error("component {component:?}: {source}")]
    Scorer {
        component: String,
        #[source]
        source: ScorerError,
    },
    #[error("cost model entry {0:?} does not name a component")]
    UnknownCost(String),
    #[error("cost model entry {component:?}: {message}")]
    BadCost { component: String, message: String },
    #[error("failure_budget {0} out of range [0, 1]")]
    FailureBudget(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComponentKind {
    Dedup {
        max_distance: u32,
    },
    /// `photo`, `nsfw` and external scorers.
    Score {
        binding: ScorerBinding,
        threshold: f64,
        direction: Direction,
    },
    Geolocate {
        weights: Weights,
        drop_unresolved: bool,
        gazetteer: Option<PathBuf>,
    },
    Geometry {
        regions: Option<PathBuf>,
    },
    Density {
        eps_km: f64,
        min_pts: usize,
    },
}

impl ComponentKind {
    /// Whether a component's per-item decision depends on the other items
    /// it sees, so moving it changes the output.
    pub fn is_stateful(&self) -> bool {
        matches!(self, ComponentKind::Dedup { .. } | ComponentKind::Density { .. })
    }

    /// Parameter whose value drives the keep/drop decision, if any.
    pub fn threshold(&self) -> Option<f64> {
        match self {
            ComponentKind::Score { threshold, .. } => Some(*threshold),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub kind: ComponentKind,
}

struct ParamReader<'a> {
    component: &'a str,
    params: &'a BTreeMap<String, Value>,
    allowed: &'a [&'a str],
}

impl<'a> ParamReader<'a> {
    fn check_names(&self) -> Result<(), ConfigError> {
        for k in self.params.keys() {
            if !self.allowed.contains(&k.as_str()) {
                return Err(ConfigError::UnknownParam {
                    component: self.component.into(),
                    param: k.clone(),
                });
            }
        }
        Ok(())
    }

    fn bad(&self, param: &str, message: &str) -> ConfigError {
        ConfigError::BadParam {
            component: self.component.into(),
            param: param.into(),
            message: message.into(),
        }
    }

    fn number(&self, name: &str, default: f64) -> Result<f64, ConfigError> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| self.bad(name, "must be a finite number")),
        }
    }

    fn integer(&self, name: &str, default: u64) -> Result<u64, ConfigError> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => {
                if let Some(i) = v.as_u64() {
                    return Ok(i);
                }
                match v.as_f64() {
                    Some(f) if f >= 0.0 && f.fract() == 0.0 && f <= u32::MAX as f64 => Ok(f as u64),
                    _ => Err(self.bad(name, "must be a non-negative integer")),
                }
            }
        }
    }

    fn boolean(&self, name: &str, default: bool) -> Result<bool, ConfigError> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| self.bad(name, "must be true or false")),
        }
    }

    fn path(&self, name: &str) -> Result<Option<PathBuf>, ConfigError> {
        match self.params.get(name) {
            None => Ok(None),
            Some(Value::String(s)) if !s.is_empty() => Ok(Some(PathBuf::from(s))),
            Some(_) => Err(self.bad(name, "must be a non-empty path string")),
        }
    }

    fn direction(&self, default: Direction) -> Result<Direction, ConfigError> {
        match self.params.get("direction") {
            None => Ok(default),
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|_| self.bad("direction", "must be \"keep-if-ge\" or \"keep-if-le\"")),
        }
    }

    fn threshold(&self) -> Result<f64, ConfigError> {
        let t = self.number("threshold", 0.5)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(ConfigError::ThresholdRange {
                component: self.component.into(),
                value: t,
            });
        }
        Ok(t)
    }
}

fn build_component(spec: &ComponentSpec) -> Result<Component, ConfigError> {
    let id = spec.id.as_str();
    let reader = |allowed: &'static [&'static str]| ParamReader {
        component: id,
        params: &spec.params,
        allowed,
    };
    let no_scorer = || -> Result<(), ConfigError> {
        match spec.scorer {
            Some(_) => Err(ConfigError::UnexpectedScorer { component: id.into() }),
            None => Ok(()),
        }
    };
    let binding = |default_builtin: &str| -> Result<ScorerBinding, ConfigError> {
        let b = spec
            .scorer
            .clone()
            .unwrap_or_else(|| ScorerBinding::builtin(default_builtin));
        b.validate().map_err(|source| ConfigError::Scorer {
            component: id.into(),
            source,
        })?;
        Ok(b)
    };
    let kind = match id {
        DEDUP => {
            no_scorer()?;
            let r = reader(&["max_distance"]);
            r.check_names()?;
            let d = r.integer("max_distance", DEFAULT_MAX_DISTANCE as u64)?;
            if d > 64 {
                return Err(r.bad("max_distance", "must lie in [0, 64]"));
            }
            ComponentKind::Dedup {
                max_distance: d as u32,
            }
        }
        PHOTO | NSFW => {
            let r = reader(&["threshold", "direction"]);
            r.check_names()?;
            let (builtin, dir) = if id == PHOTO {
                (crate::media::PHOTO_ENTROPY, Direction::KeepIfGe)
            } else {
                (crate::media::NSFW_STUB, Direction::KeepIfLe)
            };
            ComponentKind::Score {
                binding: binding(builtin)?,
                threshold: r.threshold()?,
                direction: r.direction(dir)?,
            }
        }
        GEOLOCATE => {
            no_scorer()?;
            let r = reader(&["alpha", "beta", "drop_unresolved", "gazetteer"]);
            r.check_names()?;
            let d = Weights::default();
            let weights = Weights {
                alpha: r.number("alpha", d.alpha)?,
                beta: r.number("beta", d.beta)?,
            };
            if weights.alpha < 0.0 {
                return Err(r.bad("alpha", "must be non-negative"));
            }
            if weights.beta < 0.0 {
                return Err(r.bad("beta", "must be non-negative"));
            }
            ComponentKind::Geolocate {
                weights,
                drop_unresolved: r.boolean("drop_unresolved", true)?,
                gazetteer: r.path("gazetteer")?,
            }
        }
        GEOMETRY => {
            no_scorer()?;
            let r = reader(&["regions"]);
            r.check_names()?;
            ComponentKind::Geometry {
                regions: r.path("regions")?,
            }
        }
        DENSITY => {
            no_scorer()?;
            let r = reader(&["eps_km", "min_pts"]);
            r.check_names()?;
            let eps_km = r.number("eps_km", 50.0)?;
            if eps_km <= 0.0 {
                return Err(r.bad("eps_km", "must be positive"));
            }
            let min_pts = r.integer("min_pts", 3)?;
            if min_pts == 0 {
                return Err(r.bad("min_pts", "must be at least 1"));
            }
            ComponentKind::Density {
                eps_km,
                min_pts: min_pts as usize,
            }
        }
        _ => {
            if spec.scorer.is_none() {
                return Err(ConfigError::UnknownComponent(id.into()));
            }
            let r = reader(&["threshold", "direction"]);
            r.check_names()?;
            ComponentKind::Score {
                binding: binding("")?,
                threshold: r.threshold()?,
                direction: r.direction(Direction::KeepIfGe)?,
            }
        }
    };
    Ok(Component { id: id.into(), kind })
}

/// Validated configuration with typed components.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub components: Vec<Component>,
    /// `(before, after)` pairs, explicit and implied.
    pub precedence: Vec<(usize, usize)>,
}

impl Pipeline {
    pub fn position(&self, id: &str) -> Option<usize> {
        self.components.iter().position(|c| c.id == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.components.iter().map(|c| c.id.clone()).collect()
    }
}

pub fn parse_config(bytes: &[u8]) -> Result<Pipeline, ConfigError> {
    let config: PipelineConfig =
        serde_json::from_slice(bytes).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    validate(config)
}

impl PipelineConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn component(&self, id: &str) -> Option<&ComponentSpec> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn component_mut(&mut self, id: &str) -> Option<&mut ComponentSpec> {
        self.components.iter_mut().find(|c| c.id == id)
    }

    /// Copy with relative file parameters (`gazetteer`, `regions`) joined
    /// onto `base`.
    pub fn with_paths_under(&self, base: &std::path::Path) -> PipelineConfig {
        let mut out = self.clone();
        for spec in &mut out.components {
            for key in FILE_PARAMS {
                if let Some(Value::String(s)) = spec.params.get_mut(key) {
                    if std::path::Path::new(s.as_str()).is_relative() {
                        *s = base.join(&*s).to_string_lossy().into_owned();
                    }
                }
            }
        }
        out
    }
}

pub fn validate(config: PipelineConfig) -> Result<Pipeline, ConfigError> {
    if !(0.0..=1.0).contains(&config.failure_budget) {
        return Err(ConfigError::FailureBudget(config.failure_budget));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut components = Vec::with_capacity(config.components.len());
    for (i, spec) in config.components.iter().enumerate() {
        if index.insert(spec.id.as_str(), i).is_some() {
            return Err(ConfigError::DuplicateComponent(spec.id.clone()));
        }
        components.push(build_component(spec)?);
    }

    let n = components.len();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (i, spec) in config.components.iter().enumerate() {
        for p in &spec.precedence {
            let &j = index.get(p.as_str()).ok_or_else(|| ConfigError::UnknownPrecedence {
                component: spec.id.clone(),
                target: p.clone(),
            })?;
            edges.push((j, i));
        }
    }
    if let Some(&g) = index.get(GEOLOCATE) {
        for (i, c) in components.iter().enumerate() {
            if matches!(c.kind, ComponentKind::Geometry { .. } | ComponentKind::Density { .. }) {
                edges.push((g, i));
            }
        }
    } else if let Some(c) = components
        .iter()
        .find(|c| matches!(c.kind, ComponentKind::Geometry { .. } | ComponentKind::Density { .. }))
    {
        return Err(ConfigError::MissingGeolocate(c.id.clone()));
    }
    edges.sort_unstable();
    edges.dedup();

    if let Some(cycle) = find_cycle(n, &edges) {
        return Err(ConfigError::Cycle(
            cycle.iter().map(|&i| components[i].id.clone()).collect(),
        ));
    }
    for &(a, b) in &edges {
        if a > b {
            return Err(ConfigError::OrderViolation {
                component: components[b].id.clone(),
                before: components[a].id.clone(),
            });
        }
    }
    let mut taken = vec![false; n];
    for (i, spec) in config.components.iter().enumerate() {
        if let Some(p) = spec.pinned {
            let err = |message: String| ConfigError::Pinned {
                component: spec.id.clone(),
                message,
            };
            if p >= n {
                return Err(err(format!("pinned position {p} is outside the chain of {n}")));
            }
            if p != i {
                return Err(err(format!("pinned at position {p} but listed at position {i}")));
            }
            if std::mem::replace(&mut taken[p], true) {
                return Err(err(format!("position {p} pinned twice")));
            }
        }
    }
    for (id, cost) in &config.cost_model {
        if !index.contains_key(id.as_str()) {
            return Err(ConfigError::UnknownCost(id.clone()));
        }
        let bad = |m: &str| ConfigError::BadCost {
            component: id.clone(),
            message: m.into(),
        };
        if !(cost.cost_ms.is_finite() && cost.cost_ms >= 0.0) {
            return Err(bad("cost_ms must be a non-negative number"));
        }
        if let Some(s) = cost.selectivity {
            if !(0.0..=1.0).contains(&s) {
                return Err(bad("selectivity must lie in [0, 1]"));
            }
        }
    }
    Ok(Pipeline {
        components,
        precedence: edges,
        config,
    })
}

/// Returns one cycle (first node repeated at the end) if the graph has any.
fn find_cycle(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<usize> = Vec::new();
    fn dfs(u: usize, adj: &[Vec<usize>], state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        state[u] = 1;
        stack.push(u);
        for &v in &adj[u] {
            if state[v] == 1 {
                let start = stack.iter().position(|&x| x == v).expect("on stack");
                let mut cycle = stack[start..].to_vec();
                cycle.push(v);
                return Some(cycle);
            }
            if state[v] == 0 {
                if let Some(c) = dfs(v, adj, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[u] = 2;
        None
    }
    (0..n).find_map(|u| {
        if state[u] == 0 {
            dfs(u, &adj, &mut state, &mut stack)
        } else {
            None
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub default: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentDescriptor {
    pub component_id: &'static str,
    /// Builtin implementation behind the component.
    pub builtin: &'static str,
    pub description: &'static str,
    pub stateful: bool,
    pub params: Vec<ParamSchema>,
}

fn p(name: &'static str, kind: &'static str, min: Option<f64>, max: Option<f64>, default: Value) -> ParamSchema {
    ParamSchema {
        name,
        kind,
        min,
        max,
        default,
    }
}

pub fn component_descriptors() -> Vec<ComponentDescriptor> {
    use serde_json::json;
    let direction = |d: &str| p("direction", "enum:keep-if-ge|keep-if-le", None, None, json!(d));
    vec![
        ComponentDescriptor {
            component_id: DEDUP,
            builtin: crate::media::DHASH_DEDUP,
            description: "Drops items whose image is within max_distance bits (dHash) of an earlier kept image.",
            stateful: true,
            params: vec![p("max_distance", "integer", Some(0.0), Some(64.0), json!(DEFAULT_MAX_DISTANCE))],
        },
        ComponentDescriptor {
            component_id: PHOTO,
            builtin: crate::media::PHOTO_ENTROPY,
            description: "Scores how photographic an image is (histogram entropy / 8); keeps items at or above the threshold.",
            stateful: false,
            params: vec![p("threshold", "number", Some(0.0), Some(1.0), json!(0.5)), direction("keep-if-ge")],
        },
        ComponentDescriptor {
            component_id: NSFW,
            builtin: crate::media::NSFW_STUB,
            description: "Not-safe-for-work score; the builtin stub scores 0. Keeps items at or below the threshold.",
            stateful: false,
            params: vec![p("threshold", "number", Some(0.0), Some(1.0), json!(0.5)), direction("keep-if-le")],
        },
        ComponentDescriptor {
            component_id: GEOLOCATE,
            builtin: "geolocate",
            description: "Resolves place mentions against the gazetteer; native geotags are used as-is.",
            stateful: false,
            params: vec![
                p("alpha", "number", Some(0.0), None, json!(1.0)),
                p("beta", "number", Some(0.0), None, json!(0.5)),
                p("drop_unresolved", "boolean", None, None, json!(true)),
                p("gazetteer", "path", None, None, Value::Null),
            ],
        },
        ComponentDescriptor {
            component_id: GEOMETRY,
            builtin: "geometry-filter",
            description: "Keeps items located inside a monitored region.",
            stateful: false,
            params: vec![p("regions", "path", None, None, Value::Null)],
        },
        ComponentDescriptor {
            component_id: DENSITY,
            builtin: "density-filter",
            description: "Keeps items with at least min_pts located items (itself included) within eps_km.",
            stateful: true,
            params: vec![
                p("eps_km", "number", Some(0.0), None, json!(50.0)),
                p("min_pts", "integer", Some(1.0), None, json!(3)),
            ],
        },
    ]
}

/// The four-step case-study chain: dedup, photo, nsfw, geolocate.
pub fn case_study_config() -> PipelineConfig {
    PipelineConfig {
        name: Some("case-study".into()),
        corpus: None,
        sample: None,
        components: vec![
            ComponentSpec::new(DEDUP).with_param("max_distance", DEFAULT_MAX_DISTANCE),
            ComponentSpec::new(PHOTO).with_param("threshold", 0.5),
            ComponentSpec::new(NSFW).with_param("threshold", 0.5),
            ComponentSpec::new(GEOLOCATE),
        ],
        cost_model: BTreeMap::new(),
        failure_budget: DEFAULT_FAILURE_BUDGET,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Pipeline, ConfigError> {
        parse_config(s.as_bytes())
    }

    #[test]
    fn case_study_parses_in_order() {
        let raw = case_study_config().to_json();
        let p = parse(&raw).unwrap();
        assert_eq!(p.ids(), ["dedup", "photo", "nsfw", "geolocate"]);
        assert_eq!(p.config, case_study_config());
    }

    #[test]
    fn threshold_out_of_range() {
        let e = parse(r#"{"components":[{"id":"photo","params":{"threshold":1.2}}]}"#).unwrap_err();
        assert_eq!(
            e,
            ConfigError::ThresholdRange {
                component: "photo".into(),
                value: 1.2
            }
        );
        assert_eq!(e.to_string(), "component \"photo\": threshold 1.2 out of range [0, 1]");
    }

    #[test]
    fn cycle_detected() {
        let e = parse(
            r#"{"components":[{"id":"photo","precedence":["nsfw"]},{"id":"nsfw","precedence":["photo"]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(e, ConfigError::Cycle(ref c) if c.len() == 3), "{e}");
        assert!(e.to_string().starts_with("precedence cycle: "));
    }

    #[test]
    fn strictness() {
        assert!(matches!(
            parse(r#"{"components":[],"extra":1}"#),
            Err(ConfigError::Syntax(_))
        ));
        assert_eq!(
            parse(r#"{"components":[{"id":"blur"}]}"#).unwrap_err(),
            ConfigError::UnknownComponent("blur".into())
        );
        assert!(matches!(
            parse(r#"{"components":[{"id":"dedup","params":{"threshold":0.5}}]}"#),
            Err(ConfigError::UnknownParam { .. })
        ));
        assert!(matches!(
            parse(r#"{"components":[{"id":"density"}]}"#),
            Err(ConfigError::MissingGeolocate(_))
        ));
        assert!(matches!(
            parse(r#"{"components":[{"id":"density"},{"id":"geolocate"}]}"#),
            Err(ConfigError::OrderViolation { .. })
        ));
        assert!(matches!(
            parse(r#"{"components":[{"id":"photo","pinned":1},{"id":"nsfw"}]}"#),
            Err(ConfigError::Pinned { .. })
        ));
        assert!(matches!(
            parse(r#"{"components":[{"id":"photo"}],"cost_model":{"nsfw":{"cost_ms":1}}}"#),
            Err(ConfigError::UnknownCost(_))
        ));
    }

    #[test]
    fn external_scorer_component() {
        let p = parse(
            r#"{"components":[{"id":"flood-cnn","scorer":{"scorer_id":"flood-cnn","kind":"external","endpoint":"http://127.0.0.1:9/score"},"params":{"threshold":0.6}}]}"#,
        )
        .unwrap();
        assert!(matches!(p.components[0].kind, ComponentKind::Score { threshold, .. } if threshold == 0.6));
        assert!(matches!(
            parse(r#"{"components":[{"id":"x","scorer":{"scorer_id":"x","kind":"external"}}]}"#),
            Err(ConfigError::Scorer { .. })
        ));
    }

    #[test]
    fn empty_pipeline_is_valid() {
        assert!(parse(r#"{"components":[]}"#).unwrap().components.is_empty());
    }
}
