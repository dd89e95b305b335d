//! Executes a validated pipeline over the media-carrying posts of a corpus.
//!
//! Items are processed in `(created_at, id)` order. Each component sees the
//! items still alive after the previous one; per-item work (decoding,
//! hashing, scoring, geocoding) runs in parallel, and every decision is then
//! applied sequentially, so results equal a sequential run. Flagged items
//! (undecodable media, scorer protocol errors) pass through.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{Component, ComponentKind, Pipeline};
use crate::geo::{density_filter, geometry_filter, resolve_post, GeoResolution, Weights};
use crate::ingest::{Corpus, Gazetteer, LoadError};
use crate::media::{
    dedup_decisions, dhash, load_blob, DedupDecision, Direction, HashedItem, MediaBlob, PerceptualHash,
    ScoreItem, ScoreOutcome, Scorer, ScorerError,
};
use crate::model::{Post, Region};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("component {component:?}: {source}")]
    Scorer {
        component: String,
        #[source]
        source: ScorerError,
    },
    #[error("component {component:?}: scorer failed on {failures} of {items} items, over the failure budget of {budget}; run aborted (last error: {last_error})")]
    FailureBudget {
        component: String,
        failures: usize,
        items: usize,
        budget: f64,
        last_error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RemovalReason {
    Duplicate { matched_kept_id: String, distance: u32 },
    Threshold { score: f64, threshold: f64, direction: Direction },
    ScorerFailure { error: String },
    Unresolved,
    OutsideRegions,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fate", rename_all = "snake_case")]
pub enum Fate {
    Kept,
    /// Kept, but at least one component could not process the item.
    Flagged,
    Removed {
        component: String,
        #[serde(flatten)]
        reason: RemovalReason,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub component: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub scorer_id: String,
    #[serde(flatten)]
    pub outcome: ScoreOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub post_id: String,
    #[serde(with = "crate::model::utc_seconds")]
    pub created_at: DateTime<Utc>,
    #[serde(flatten)]
    pub fate: Fate,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<Flag>,
    /// Component id → score with scorer provenance.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scores: BTreeMap<String, ScoreRecord>,
}

impl ItemRecord {
    pub fn in_output(&self) -> bool {
        !matches!(self.fate, Fate::Removed { .. })
    }

    pub fn removed_by(&self) -> Option<&str> {
        match &self.fate {
            Fate::Removed { component, .. } => Some(component),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub id: String,
    pub input: usize,
    pub passed: usize,
    pub removed: usize,
    pub flagged: usize,
    pub failures: usize,
    /// passed / input, 1 for an empty input.
    pub selectivity: f64,
    /// Wall-clock time of the step.
    pub elapsed_ms: f64,
    pub mean_cost_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: super::config::PipelineConfig,
    pub total: usize,
    pub items: Vec<ItemRecord>,
    pub components: Vec<ComponentStats>,
    /// Resolutions of output items, in item order.
    pub resolutions: Vec<GeoResolution>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RunRecord {
    pub fn kept_ids(&self) -> Vec<&str> {
        self.items
            .iter()
            .filter(|r| r.in_output())
            .map(|r| r.post_id.as_str())
            .collect()
    }

    pub fn kept(&self) -> usize {
        self.items.iter().filter(|r| r.in_output()).count()
    }

    /// Items removed by `component`, in item order.
    pub fn removal_log(&self, component: &str) -> Vec<&ItemRecord> {
        self.items
            .iter()
            .filter(|r| r.removed_by() == Some(component))
            .collect()
    }
}

#[derive(Debug, Clone)]
struct State {
    records: Vec<ItemRecord>,
    alive: Vec<bool>,
    resolutions: Vec<Option<GeoResolution>>,
    stats: Vec<ComponentStats>,
    warnings: Vec<String>,
}

const PREFIX_CACHE_LIMIT: usize = 256;

/// Pipeline executor over one corpus. Decoded media, hashes, scores,
/// geocoding results and per-prefix states are cached, so repeated runs
/// with small config changes (threshold sweeps) only redo what changed.
pub struct Engine {
    root: PathBuf,
    items: Vec<Post>,
    blobs: OnceLock<Vec<Vec<MediaBlob>>>,
    hashes: OnceLock<Vec<Result<Vec<PerceptualHash>, String>>>,
    gazetteers: HashMap<Option<PathBuf>, Arc<Gazetteer>>,
    regions: HashMap<Option<PathBuf>, Arc<Vec<Region>>>,
    scores: HashMap<String, Vec<Option<ScoreOutcome>>>,
    geocodes: HashMap<String, Vec<Option<Option<GeoResolution>>>>,
    prefixes: HashMap<String, State>,
}

impl Engine {
    pub fn new(corpus: &Corpus) -> Self {
        Self::from_posts(&corpus.root, corpus.posts.iter().cloned())
    }

    /// Items are the posts with at least one media reference, ordered by
    /// `(created_at, id)`.
    pub fn from_posts(root: &Path, posts: impl IntoIterator<Item = Post>) -> Self {
        let mut items: Vec<Post> = posts.into_iter().filter(|p| !p.media.is_empty()).collect();
        items.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        Engine {
            root: root.to_path_buf(),
            items,
            blobs: OnceLock::new(),
            hashes: OnceLock::new(),
            gazetteers: HashMap::new(),
            regions: HashMap::new(),
            scores: HashMap::new(),
            geocodes: HashMap::new(),
            prefixes: HashMap::new(),
        }
    }

    pub fn items(&self) -> &[Post] {
        &self.items
    }

    /// Supplies a gazetteer for geolocate components without a path.
    pub fn set_gazetteer(&mut self, g: Gazetteer) {
        self.gazetteers.insert(None, Arc::new(g));
    }

    /// Supplies regions for geometry components without a path.
    pub fn set_regions(&mut self, r: Vec<Region>) {
        self.regions.insert(None, Arc::new(r));
    }

    fn blobs(&self) -> &[Vec<MediaBlob>] {
        self.blobs.get_or_init(|| {
            let media_dir = self.root.join(crate::ingest::layout::MEDIA_DIR);
            self.items
                .par_iter()
                .map(|p| {
                    p.media
                        .iter()
                        .map(|m| {
                            if crate::ingest::safe_media_path(&m.path) {
                                load_blob(&media_dir.join(&m.path))
                            } else {
                                MediaBlob::Failed(format!("unsafe media path {:?}", m.path))
                            }
                        })
                        .collect()
                })
                .collect()
        })
    }

    fn hashes(&self) -> &[Result<Vec<PerceptualHash>, String>] {
        let blobs = self.blobs();
        self.hashes.get_or_init(|| {
            blobs
                .par_iter()
                .map(|bs| {
                    bs.iter()
                        .map(|b| match b {
                            MediaBlob::Decoded { image, .. } => Ok(dhash(image)),
                            MediaBlob::Failed(e) => Err(format!("undecodable media: {e}")),
                        })
                        .collect()
                })
                .collect()
        })
    }

    fn gazetteer(&mut self, path: &Option<PathBuf>) -> Result<Arc<Gazetteer>, RunError> {
        if let Some(g) = self.gazetteers.get(path) {
            return Ok(g.clone());
        }
        let file = path
            .clone()
            .unwrap_or_else(|| self.root.join(crate::ingest::layout::GAZETTEER));
        let g = Arc::new(crate::ingest::load_gazetteer(&file)?);
        self.gazetteers.insert(path.clone(), g.clone());
        Ok(g)
    }

    fn region_set(&mut self, path: &Option<PathBuf>) -> Result<Arc<Vec<Region>>, RunError> {
        if let Some(r) = self.regions.get(path) {
            return Ok(r.clone());
        }
        let file = path
            .clone()
            .unwrap_or_else(|| self.root.join(crate::ingest::layout::REGIONS));
        let r = Arc::new(crate::ingest::load_regions(&file)?);
        self.regions.insert(path.clone(), r.clone());
        Ok(r)
    }

    fn initial_state(&self) -> State {
        State {
            records: self
                .items
                .iter()
                .map(|p| ItemRecord {
                    post_id: p.id.clone(),
                    created_at: p.created_at,
                    fate: Fate::Kept,
                    flags: Vec::new(),
                    scores: BTreeMap::new(),
                })
                .collect(),
            alive: vec![true; self.items.len()],
            resolutions: vec![None; self.items.len()],
            stats: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn run(&mut self, pipeline: &Pipeline) -> Result<RunRecord, RunError> {
        let keys: Vec<String> = (0..pipeline.components.len())
            .map(|k| {
                let mut key = format!("{}|", pipeline.config.failure_budget);
                for spec in &pipeline.config.components[..=k] {
                    key.push_str(&serde_json::to_string(spec).expect("spec serializes"));
                    key.push('\n');
                }
                key
            })
            .collect();
        let resume = (0..keys.len()).rev().find(|&k| self.prefixes.contains_key(&keys[k]));
        let (mut state, start) = match resume {
            Some(k) => (self.prefixes[&keys[k]].clone(), k + 1),
            None => (self.initial_state(), 0),
        };
        for (component, key) in pipeline.components.iter().zip(&keys).skip(start) {
            self.apply(component, pipeline.config.failure_budget, &mut state)?;
            if self.prefixes.len() >= PREFIX_CACHE_LIMIT {
                self.prefixes.clear();
            }
            self.prefixes.insert(key.clone(), state.clone());
        }

        for (r, alive) in state.records.iter_mut().zip(&state.alive) {
            if *alive && !r.flags.is_empty() {
                r.fate = Fate::Flagged;
            }
        }
        let resolutions = state
            .resolutions
            .iter()
            .zip(&state.alive)
            .filter_map(|(r, &a)| if a { r.clone() } else { None })
            .collect();
        Ok(RunRecord {
            config: pipeline.config.clone(),
            total: self.items.len(),
            items: state.records,
            components: state.stats,
            resolutions,
            warnings: state.warnings,
        })
    }

    fn apply(&mut self, c: &Component, budget: f64, st: &mut State) -> Result<(), RunError> {
        let t0 = Instant::now();
        let alive: Vec<usize> = (0..self.items.len()).filter(|&i| st.alive[i]).collect();
        let mut removed = 0;
        let mut flagged = 0;
        let mut failures = 0;
        let remove = |st: &mut State, i: usize, reason: RemovalReason, removed: &mut usize| {
            st.alive[i] = false;
            st.records[i].fate = Fate::Removed {
                component: c.id.clone(),
                reason,
            };
            *removed += 1;
        };
        let flag = |st: &mut State, i: usize, reason: String, flagged: &mut usize| {
            st.records[i].flags.push(Flag {
                component: c.id.clone(),
                reason,
            });
            *flagged += 1;
        };

        match &c.kind {
            ComponentKind::Dedup { max_distance } => {
                let hashes = self.hashes();
                let batch: Vec<HashedItem> = alive
                    .iter()
                    .map(|&i| HashedItem {
                        id: self.items[i].id.clone(),
                        created_at: self.items[i].created_at,
                        hashes: hashes[i].clone(),
                    })
                    .collect();
                let decisions = dedup_decisions(&batch, *max_distance);
                for (&i, d) in alive.iter().zip(decisions) {
                    match d {
                        DedupDecision::Kept => {}
                        DedupDecision::Flagged { reason } => flag(st, i, reason, &mut flagged),
                        DedupDecision::Removed {
                            matched_kept_id,
                            distance,
                        } => remove(
                            st,
                            i,
                            RemovalReason::Duplicate {
                                matched_kept_id,
                                distance,
                            },
                            &mut removed,
                        ),
                    }
                }
            }
            ComponentKind::Score {
                binding,
                threshold,
                direction,
            } => {
                let scorer = Scorer::new(binding.clone()).map_err(|source| RunError::Scorer {
                    component: c.id.clone(),
                    source,
                })?;
                let key = serde_json::to_string(binding).expect("binding serializes");
                let n = self.items.len();
                let mut cache = self.scores.remove(&key).unwrap_or_else(|| vec![None; n]);
                let missing: Vec<usize> = alive.iter().copied().filter(|&i| cache[i].is_none()).collect();
                let blobs = self.blobs();
                let fresh: Vec<(usize, ScoreOutcome)> = missing
                    .par_iter()
                    .map(|&i| {
                        let item = ScoreItem {
                            item_id: &self.items[i].id,
                            text: &self.items[i].text,
                            media: &blobs[i],
                        };
                        (i, scorer.score(&item))
                    })
                    .collect();
                for (i, o) in fresh {
                    cache[i] = Some(o);
                }
                let mut last_error = String::new();
                for &i in &alive {
                    let outcome = cache[i].clone().expect("scored above");
                    if outcome.is_failure() {
                        failures += 1;
                        if let ScoreOutcome::Defaulted { error, .. } | ScoreOutcome::Rejected { error } = &outcome {
                            last_error = error.clone();
                        }
                    }
                    st.records[i].scores.insert(
                        c.id.clone(),
                        ScoreRecord {
                            scorer_id: binding.scorer_id.clone(),
                            outcome: outcome.clone(),
                        },
                    );
                    match outcome {
                        ScoreOutcome::Scored { score } | ScoreOutcome::Defaulted { score, .. } => {
                            if !direction.keeps(score, *threshold) {
                                remove(
                                    st,
                                    i,
                                    RemovalReason::Threshold {
                                        score,
                                        threshold: *threshold,
                                        direction: *direction,
                                    },
                                    &mut removed,
                                );
                            }
                        }
                        ScoreOutcome::Rejected { error } => {
                            remove(st, i, RemovalReason::ScorerFailure { error }, &mut removed)
                        }
                        ScoreOutcome::Flagged { error } => flag(st, i, error, &mut flagged),
                    }
                }
                self.scores.insert(key, cache);
                if failures as f64 > budget * alive.len() as f64 {
                    return Err(RunError::FailureBudget {
                        component: c.id.clone(),
                        failures,
                        items: alive.len(),
                        budget,
                        last_error,
                    });
                }
            }
            ComponentKind::Geolocate {
                weights,
                drop_unresolved,
                gazetteer,
            } => {
                let g = self.gazetteer(gazetteer)?;
                let key = geocode_key(weights, gazetteer);
                let n = self.items.len();
                let mut cache = self.geocodes.remove(&key).unwrap_or_else(|| vec![None; n]);
                let missing: Vec<usize> = alive.iter().copied().filter(|&i| cache[i].is_none()).collect();
                let fresh: Vec<(usize, Option<GeoResolution>)> = missing
                    .par_iter()
                    .map(|&i| (i, resolve_post(&self.items[i], &g, weights)))
                    .collect();
                for (i, r) in fresh {
                    cache[i] = Some(r);
                }
                for &i in &alive {
                    let r = cache[i].clone().expect("geocoded above");
                    if r.is_none() && *drop_unresolved {
                        remove(st, i, RemovalReason::Unresolved, &mut removed);
                    }
                    st.resolutions[i] = r;
                }
                self.geocodes.insert(key, cache);
            }
            ComponentKind::Geometry { regions } => {
                let regions = self.region_set(regions)?;
                let located: Vec<usize> = alive.iter().copied().filter(|&i| st.resolutions[i].is_some()).collect();
                let res: Vec<GeoResolution> = located
                    .iter()
                    .map(|&i| st.resolutions[i].clone().expect("filtered"))
                    .collect();
                let outcome = geometry_filter(&res, &regions);
                st.warnings.extend(outcome.warnings.iter().map(|w| format!("{}: {w}", c.id)));
                let mut keep = vec![false; self.items.len()];
                for (&i, k) in located.iter().zip(outcome.keep) {
                    keep[i] = k;
                }
                for &i in &alive {
                    if st.resolutions[i].is_none() {
                        remove(st, i, RemovalReason::Unresolved, &mut removed);
                    } else if !keep[i] {
                        remove(st, i, RemovalReason::OutsideRegions, &mut removed);
                    }
                }
            }
            ComponentKind::Density { eps_km, min_pts } => {
                let located: Vec<usize> = alive.iter().copied().filter(|&i| st.resolutions[i].is_some()).collect();
                let points: Vec<_> = located
                    .iter()
                    .map(|&i| st.resolutions[i].as_ref().expect("filtered").primary().point())
                    .collect();
                let keep_mask = density_filter(&points, *eps_km, *min_pts);
                let mut keep = vec![false; self.items.len()];
                for (&i, k) in located.iter().zip(keep_mask) {
                    keep[i] = k;
                }
                for &i in &alive {
                    if st.resolutions[i].is_none() {
                        remove(st, i, RemovalReason::Unresolved, &mut removed);
                    } else if !keep[i] {
                        remove(st, i, RemovalReason::Sparse, &mut removed);
                    }
                }
            }
        }

        let input = alive.len();
        let elapsed_ms = t0.elapsed().as_secs_f64() * 1000.0;
        st.stats.push(ComponentStats {
            id: c.id.clone(),
            input,
            passed: input - removed,
            removed,
            flagged,
            failures,
            selectivity: if input == 0 {
                1.0
            } else {
                (input - removed) as f64 / input as f64
            },
            elapsed_ms,
            mean_cost_ms: if input == 0 { 0.0 } else { elapsed_ms / input as f64 },
        });
        Ok(())
    }
}

fn geocode_key(w: &Weights, g: &Option<PathBuf>) -> String {
    format!("{:?}|{:?}|{:?}", w.alpha.to_bits(), w.beta.to_bits(), g)
}

/// Runs `pipeline` once over `corpus`.
pub fn run(pipeline: &Pipeline, corpus: &Corpus) -> Result<RunRecord, RunError> {
    Engine::new(corpus).run(pipeline)
}
