use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use geopulse_core::ingest::{load_sample, Corpus};
use geopulse_core::model::LabeledSample;
use geopulse_core::pipeline::{
    artifacts, declared_costs, default_grid, evaluate as score, measured_costs, optimize_with, parse_config,
    sweep as sweep_grid, validate, Engine, EvalMetrics, Pipeline, RunRecord,
};

use crate::{print_json, write_json};

#[derive(Args)]
pub struct PipelineArgs {
    /// Pipeline config JSON. Relative paths inside it resolve against its
    /// directory.
    #[arg(long)]
    config: PathBuf,
    /// Corpus directory; defaults to the config's `corpus`.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Labeled sample CSV; defaults to the config's `sample`, then the
    /// corpus sample.csv.
    #[arg(long)]
    sample: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    p: PipelineArgs,
    #[arg(long)]
    component: String,
    #[arg(long, default_value = "threshold")]
    param: String,
    /// Comma-separated values; defaults to 0, 0.05, ..., 1.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
}

#[derive(Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    p: PipelineArgs,
    /// Profile the pipeline on the corpus and use measured costs and
    /// selectivities instead of the config's cost_model.
    #[arg(long)]
    measured: bool,
}

struct Loaded {
    /// As written in the config file.
    pipeline: Pipeline,
    /// With file parameters resolved against the config directory.
    exec: Pipeline,
    base: PathBuf,
}

fn load_config(path: &Path) -> Result<Loaded> {
    let raw = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let pipeline = parse_config(&raw).with_context(|| format!("invalid config {}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let exec = validate(pipeline.config.with_paths_under(&base))?;
    Ok(Loaded { pipeline, exec, base })
}

fn corpus_for(a: &PipelineArgs, l: &Loaded) -> Result<Corpus> {
    let dir = match (&a.corpus, &l.pipeline.config.corpus) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => l.base.join(d),
        (None, None) => bail!("no corpus: pass --corpus or set \"corpus\" in the config"),
    };
    Corpus::open(&dir).with_context(|| format!("opening corpus {}", dir.display()))
}

fn sample_for(a: &PipelineArgs, l: &Loaded, corpus: &Corpus) -> Result<Option<LabeledSample>> {
    let path = match (&a.sample, &l.pipeline.config.sample) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => l.base.join(p),
        (None, None) => {
            let p = corpus.root.join(geopulse_core::ingest::layout::SAMPLE);
            if !p.is_file() {
                return Ok(None);
            }
            p
        }
    };
    Ok(Some(load_sample(&path, &corpus.post_ids())?))
}

fn execute(engine: &mut Engine, l: &Loaded) -> Result<RunRecord> {
    let mut record = engine.run(&l.exec)?;
    record.config = l.pipeline.config.clone();
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    Ok(record)
}

fn print_summary(record: &RunRecord, metrics: Option<&EvalMetrics>) {
    println!("{:<14} {:>8} {:>8} {:>8} {:>8} {:>10}", "component", "input", "passed", "removed", "flagged", "ms/item");
    for c in &record.components {
        println!(
            "{:<14} {:>8} {:>8} {:>8} {:>8} {:>10.4}",
            c.id, c.input, c.passed, c.removed, c.flagged, c.mean_cost_ms
        );
    }
    println!("kept {} of {} items", record.kept(), record.total);
    if let Some(m) = metrics {
        println!(
            "precision {:.4}  recall {:.4}  reduction {:.4}  ({} labeled{})",
            m.precision,
            m.recall,
            m.reduction_rate,
            m.labeled,
            if m.nothing_kept { ", nothing kept" } else { "" }
        );
    }
}

pub fn run(a: PipelineArgs) -> Result<()> {
    let Some(out) = a.out.clone() else {
        bail!("--out is required for run");
    };
    let l = load_config(&a.config)?;
    let corpus = corpus_for(&a, &l)?;
    let sample = sample_for(&a, &l, &corpus)?;
    let record = execute(&mut Engine::new(&corpus), &l)?;
    let metrics = sample.as_ref().map(|s| score(&record, s));
    artifacts::write_run(&out, &record, metrics.as_ref())?;
    print_summary(&record, metrics.as_ref());
    println!("wrote run to {}", out.display());
    Ok(())
}

pub fn evaluate(a: PipelineArgs) -> Result<()> {
    let l = load_config(&a.config)?;
    let corpus = corpus_for(&a, &l)?;
    let Some(sample) = sample_for(&a, &l, &corpus)? else {
        bail!("no labeled sample: pass --sample or add sample.csv to the corpus");
    };
    let record = execute(&mut Engine::new(&corpus), &l)?;
    let metrics = score(&record, &sample);
    match &a.out {
        Some(out) => {
            artifacts::write_run(out, &record, Some(&metrics))?;
            print_summary(&record, Some(&metrics));
        }
        None => print_json(&metrics)?,
    }
    Ok(())
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let l = load_config(&a.p.config)?;
    let corpus = corpus_for(&a.p, &l)?;
    let Some(sample) = sample_for(&a.p, &l, &corpus)? else {
        bail!("no labeled sample: pass --sample or add sample.csv to the corpus");
    };
    let grid = if a.grid.is_empty() { default_grid() } else { a.grid.clone() };
    let rows = sweep_grid(&mut Engine::new(&corpus), &l.exec, &sample, &a.component, &a.param, &grid)?;
    println!("{:>8} {:>10} {:>10} {:>10} {:>8}", a.param, "precision", "recall", "reduction", "kept");
    for r in &rows {
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>10.4} {:>8}",
            r.value, r.metrics.precision, r.metrics.recall, r.metrics.reduction_rate, r.metrics.kept
        );
    }
    if let Some(out) = &a.p.out {
        fs::create_dir_all(out)?;
        write_json(&out.join("sweep.json"), &rows)?;
        let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
        w.write_record(["value", "precision", "recall", "reduction_rate", "kept", "total"])?;
        for r in &rows {
            w.write_record([
                r.value.to_string(),
                r.metrics.precision.to_string(),
                r.metrics.recall.to_string(),
                r.metrics.reduction_rate.to_string(),
                r.metrics.kept.to_string(),
                r.metrics.total.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn optimize(a: OptimizeArgs) -> Result<()> {
    let l = load_config(&a.p.config)?;
    let table = if a.measured {
        let corpus = corpus_for(&a.p, &l)?;
        let sample = sample_for(&a.p, &l, &corpus)?.unwrap_or(LabeledSample {
            sample_id: String::new(),
            labels: Default::default(),
        });
        let record = execute(&mut Engine::new(&corpus), &l)?;
        measured_costs(&l.pipeline, &score(&record, &sample))?
    } else {
        declared_costs(&l.pipeline)?
    };
    let report = optimize_with(&l.pipeline, &table)?;
    println!("order     {}", report.original_order.join(" -> "));
    println!("optimized {}", report.order.join(" -> "));
    println!(
        "expected cost per item {:.4} -> {:.4} ms (ratio {:.4}, {})",
        report.original_cost,
        report.optimized_cost,
        report.ratio,
        serde_json::to_value(report.method)?.as_str().unwrap_or_default()
    );
    if let Some(out) = &a.p.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("config.json"), report.config.to_json() + "\n")?;
        write_json(&out.join("optimize.json"), &report)?;
    }
    Ok(())
}
