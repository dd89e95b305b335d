//! Data-root layout and the run registry.
//!
//! ```text
//! <data_root>/corpora/<corpus_id>/        corpus directories (posts.jsonl, ...)
//! <data_root>/corpora/<corpus_id>/<sample_id>.csv   extra labeled samples
//! <data_root>/dictionaries/<id>.json      trigger dictionaries
//! <data_root>/runs/<run_id>/              run artifacts plus status.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use geopulse_core::ingest::{layout, load_sample, safe_media_path, Corpus};
use geopulse_core::model::LabeledSample;
use geopulse_core::pipeline::config::FILE_PARAMS;
use geopulse_core::pipeline::{artifacts, validate, Pipeline, PipelineConfig};
use geopulse_core::trigger::Dictionary;

use crate::error::ApiError;

pub const CORPORA: &str = "corpora";
pub const DICTIONARIES: &str = "dictionaries";
pub const RUNS: &str = "runs";
pub const STATUS: &str = "status.json";
pub const SWEEPS: &str = "sweeps.json";

/// Ids name directories and files, so they are restricted to
/// `[A-Za-z0-9_.-]` and may not start with a dot.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id.len() <= 128
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b"_.-".contains(&b))
}

fn list_dir(dir: &Path, want_dirs: bool, ext: Option<&str>) -> Vec<String> {
    let Ok(rd) = fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut out: Vec<String> = rd
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir() == want_dirs)
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            match ext {
                Some(x) => name.strip_suffix(x).map(str::to_string),
                None => Some(name),
            }
        })
        .filter(|n| valid_id(n))
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone)]
pub struct DataRoot {
    pub root: PathBuf,
}

impl DataRoot {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataRoot { root: root.into() }
    }

    pub fn corpus_ids(&self) -> Vec<String> {
        list_dir(&self.root.join(CORPORA), true, None)
    }

    pub fn dictionary_ids(&self) -> Vec<String> {
        list_dir(&self.root.join(DICTIONARIES), false, Some(".json"))
    }

    pub fn corpus_dir(&self, id: &str) -> Result<PathBuf, ApiError> {
        let dir = self.root.join(CORPORA).join(id);
        if valid_id(id) && dir.join(layout::POSTS).is_file() {
            Ok(dir)
        } else {
            Err(ApiError::not_found(format!("unknown corpus {id:?}")))
        }
    }

    /// Explicit id, else the config's `corpus` field, else the only corpus.
    pub fn pick_corpus(&self, explicit: Option<&str>, config: Option<&PipelineConfig>) -> Result<String, ApiError> {
        if let Some(id) = explicit.or(config.and_then(|c| c.corpus.as_deref())) {
            return Ok(id.to_string());
        }
        let ids = self.corpus_ids();
        match ids.as_slice() {
            [only] => Ok(only.clone()),
            [] => Err(ApiError::not_found("no corpora under the data root")),
            _ => Err(ApiError::bad_request(format!(
                "corpus_id is required: {} corpora available",
                ids.len()
            ))),
        }
    }

    pub fn open_corpus(&self, id: &str) -> Result<Corpus, ApiError> {
        Ok(Corpus::open(&self.corpus_dir(id)?)?)
    }

    /// `sample.csv` by default, else `<sample_id>.csv` in the corpus.
    pub fn sample(&self, corpus: &Corpus, sample_id: Option<&str>) -> Result<LabeledSample, ApiError> {
        let file = match sample_id {
            None | Some("sample") => layout::SAMPLE.to_string(),
            Some(id) if valid_id(id) => format!("{id}.csv"),
            Some(id) => return Err(ApiError::not_found(format!("unknown sample {id:?}"))),
        };
        let path = corpus.root.join(&file);
        if !path.is_file() {
            return Err(ApiError::not_found(format!(
                "sample {:?} not found in corpus",
                sample_id.unwrap_or("sample")
            )));
        }
        Ok(load_sample(&path, &corpus.post_ids())?)
    }

    pub fn dictionary(&self, id: &str) -> Result<Dictionary, ApiError> {
        let path = self.root.join(DICTIONARIES).join(format!("{id}.json"));
        if !valid_id(id) || !path.is_file() {
            return Err(ApiError::not_found(format!("unknown dictionary {id:?}")));
        }
        artifacts::read_json(&path).map_err(|e| ApiError::internal(e.to_string()))
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.root.join(RUNS)
    }
}

/// Parses a client-supplied config. File parameters must be relative
/// paths without `..`; they are resolved inside the corpus directory.
pub fn parse_client_config(raw: &Value) -> Result<PipelineConfig, ApiError> {
    let config: PipelineConfig = serde_json::from_value(raw.clone())
        .map_err(|e| ApiError::from(geopulse_core::pipeline::ConfigError::Syntax(e.to_string())))?;
    for spec in &config.components {
        for key in FILE_PARAMS {
            if let Some(v) = spec.params.get(key).and_then(Value::as_str) {
                if !safe_media_path(v) {
                    return Err(ApiError::new(
                        axum::http::StatusCode::UNPROCESSABLE_ENTITY,
                        "invalid_config",
                        format!(
                            "component {:?}: parameter {key:?} must be a relative path inside the corpus directory",
                            spec.id
                        ),
                    ));
                }
            }
        }
    }
    Ok(config)
}

/// The validated pipeline plus a copy with file parameters rebased onto
/// `corpus_root`, which is what actually executes.
pub fn executable(config: PipelineConfig, corpus_root: &Path) -> Result<(Pipeline, Pipeline), ApiError> {
    let rebased = config.with_paths_under(corpus_root);
    Ok((validate(config)?, validate(rebased)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunState {
    Pending,
    Running,
    Done,
    Failed,
}

impl RunState {
    pub fn is_final(self) -> bool {
        matches!(self, RunState::Done | RunState::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStatus {
    pub run_id: String,
    pub corpus_id: String,
    pub status: RunState,
    /// Creation order within this data root.
    pub seq: u64,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Run statuses, mirrored to `runs/<run_id>/status.json`. Every mutation
/// holds the write lock while it persists, so writers are serialized and
/// readers never see a status that is not on disk.
pub struct RunRegistry {
    dir: PathBuf,
    runs: RwLock<BTreeMap<String, RunStatus>>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

impl RunRegistry {
    /// Loads existing runs. Runs left pending or running by a previous
    /// process are marked failed.
    pub fn open(dir: PathBuf) -> io::Result<Self> {
        fs::create_dir_all(&dir)?;
        let mut runs = BTreeMap::new();
        for id in list_dir(&dir, true, None) {
            let path = dir.join(&id).join(STATUS);
            let Ok(mut st) = artifacts::read_json::<RunStatus>(&path) else {
                log::warn!("skipping run directory {id}: unreadable {STATUS}");
                continue;
            };
            if !st.status.is_final() {
                st.status = RunState::Failed;
                st.finished_at = Some(Utc::now());
                st.error = Some("interrupted: the service stopped before the run finished".into());
                write_atomic(&path, &serde_json::to_vec_pretty(&st)?)?;
            }
            runs.insert(id, st);
        }
        Ok(RunRegistry {
            dir,
            runs: RwLock::new(runs),
        })
    }

    pub fn run_dir(&self, id: &str) -> PathBuf {
        self.dir.join(id)
    }

    pub fn get(&self, id: &str) -> Option<RunStatus> {
        self.runs.read().expect("registry lock").get(id).cloned()
    }

    /// All runs in creation order.
    pub fn list(&self) -> Vec<RunStatus> {
        let mut v: Vec<RunStatus> = self.runs.read().expect("registry lock").values().cloned().collect();
        v.sort_by_key(|r| r.seq);
        v
    }

    /// Registers a fresh pending run and writes its config snapshot.
    pub fn create(&self, corpus_id: &str, config: &PipelineConfig) -> io::Result<RunStatus> {
        let mut runs = self.runs.write().expect("registry lock");
        let mut id = uuid::Uuid::new_v4().simple().to_string();
        while runs.contains_key(&id) {
            id = uuid::Uuid::new_v4().simple().to_string();
        }
        let st = RunStatus {
            run_id: id.clone(),
            corpus_id: corpus_id.into(),
            status: RunState::Pending,
            seq: runs.values().map(|r| r.seq + 1).max().unwrap_or(0),
            created_at: Utc::now(),
            started_at: None,
            finished_at: None,
            error: None,
        };
        let dir = self.run_dir(&id);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(artifacts::CONFIG), config.to_json())?;
        write_atomic(&dir.join(STATUS), &serde_json::to_vec_pretty(&st)?)?;
        runs.insert(id, st.clone());
        Ok(st)
    }

    /// Applies `f` to a non-final run and persists the result.
    pub fn update(&self, id: &str, f: impl FnOnce(&mut RunStatus)) -> io::Result<RunStatus> {
        let mut runs = self.runs.write().expect("registry lock");
        let st = runs
            .get_mut(id)
            .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, format!("unknown run {id}")))?;
        if st.status.is_final() {
            return Err(io::Error::other(format!("run {id} is finished and immutable")));
        }
        let mut next = st.clone();
        f(&mut next);
        write_atomic(&self.run_dir(id).join(STATUS), &serde_json::to_vec_pretty(&next)?)?;
        *st = next.clone();
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids() {
        assert!(valid_id("flood-2021_v1.2"));
        for bad in ["", ".hidden", "a/b", "..", "a b", "x\\y"] {
            assert!(!valid_id(bad), "{bad}");
        }
    }

    #[test]
    fn registry_persists_and_freezes_final_runs() {
        let dir = tempfile::tempdir().unwrap();
        let reg = RunRegistry::open(dir.path().to_path_buf()).unwrap();
        let cfg = geopulse_core::pipeline::case_study_config();
        let a = reg.create("c", &cfg).unwrap();
        let b = reg.create("c", &cfg).unwrap();
        assert_ne!(a.run_id, b.run_id);
        assert_eq!(b.seq, a.seq + 1);
        reg.update(&a.run_id, |s| s.status = RunState::Done).unwrap();
        assert!(reg.update(&a.run_id, |s| s.status = RunState::Failed).is_err());

        let reopened = RunRegistry::open(dir.path().to_path_buf()).unwrap();
        assert_eq!(reopened.get(&a.run_id).unwrap().status, RunState::Done);
        let b2 = reopened.get(&b.run_id).unwrap();
        assert_eq!(b2.status, RunState::Failed);
        assert!(b2.error.unwrap().contains("interrupted"));
    }
}
