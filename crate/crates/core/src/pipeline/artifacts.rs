//! On-disk layout of a run directory, shared by the CLI and the service.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::engine::{ComponentStats, ItemRecord, RunRecord};
use super::metrics::EvalMetrics;
use crate::geo::GeoResolution;

pub const CONFIG: &str = "config.json";
pub const RECORD: &str = "record.jsonl";
pub const SUMMARY: &str = "summary.json";
pub const RESOLUTIONS: &str = "resolutions.jsonl";
pub const METRICS: &str = "metrics.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total: usize,
    pub kept: usize,
    pub components: Vec<ComponentStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn bad_data(path: &Path, e: impl std::fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| bad_data(path, e))?;
    s.push('\n');
    fs::write(path, s)
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut w, r).map_err(|e| bad_data(path, e))?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> io::Result<T> {
    let raw = fs::read(path)?;
    serde_json::from_slice(&raw).map_err(|e| bad_data(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> io::Result<Vec<T>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| bad_data(path, format!("line {}: {e}", n + 1)))?);
    }
    Ok(out)
}

/// Writes the record (and metrics, when given) into `dir`, creating it.
pub fn write_run(dir: &Path, record: &RunRecord, metrics: Option<&EvalMetrics>) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join(CONFIG), &record.config)?;
    write_jsonl(&dir.join(RECORD), &record.items)?;
    write_jsonl(&dir.join(RESOLUTIONS), &record.resolutions)?;
    write_json(
        &dir.join(SUMMARY),
        &RunSummary {
            total: record.total,
            kept: record.kept(),
            components: record.components.clone(),
            warnings: record.warnings.clone(),
        },
    )?;
    if let Some(m) = metrics {
        write_json(&dir.join(METRICS), m)?;
    }
    Ok(())
}

pub fn read_run(dir: &Path) -> io::Result<RunRecord> {
    let config: PipelineConfig = read_json(&dir.join(CONFIG))?;
    let items: Vec<ItemRecord> = read_jsonl(&dir.join(RECORD))?;
    let summary: RunSummary = read_json(&dir.join(SUMMARY))?;
    Ok(RunRecord {
        config,
        total: summary.total,
        items,
        components: summary.components,
        resolutions: read_resolutions(dir)?,
        warnings: summary.warnings,
    })
}

pub fn read_resolutions(dir: &Path) -> io::Result<Vec<GeoResolution>> {
    read_jsonl(&dir.join(RESOLUTIONS))
}

/// `None` when the run was not evaluated against a sample.
pub fn read_metrics(dir: &Path) -> io::Result<Option<EvalMetrics>> {
    let path = dir.join(METRICS);
    if !path.exists() {
        return Ok(None);
    }
    read_json(&path).map(Some)
}
