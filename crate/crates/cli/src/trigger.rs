use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;

use geopulse_core::ingest::Corpus;
use geopulse_core::pipeline::artifacts::read_json;
use geopulse_core::trigger::{
    build_dictionary, corpus_windows, evaluate_loeo, train as train_model, Dictionary, DictionaryParams,
    Hyperparameters, LoeoOptions, DEFAULT_BUCKET_SECS, DEFAULT_WINDOW,
};

use crate::write_json;

#[derive(Args)]
pub struct DictBuildArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    language: String,
    /// Comma-separated seed terms.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<String>,
    #[arg(long, default_value_t = 25)]
    k: usize,
    #[arg(long, default_value_t = 50)]
    min_freq: u64,
    #[arg(long, default_value_t = 0.3)]
    min_corr: f64,
    #[arg(long, default_value_t = DEFAULT_BUCKET_SECS)]
    bucket_secs: i64,
    /// Events CSV; defaults to the corpus events.csv.
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct WindowArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Dictionary JSON (as written by `dict-build`).
    #[arg(long)]
    dictionary: PathBuf,
    /// Window length in buckets.
    #[arg(long, short = 'W', default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, default_value_t = DEFAULT_BUCKET_SECS)]
    bucket_secs: i64,
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    w: WindowArgs,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    l2: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    #[command(flatten)]
    w: WindowArgs,
    /// Matched quiet windows per positive test window.
    #[arg(long, default_value_t = 1)]
    negative_ratio: usize,
    /// Also write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(corpus: &Path, events: &Option<PathBuf>) -> Result<(Corpus, Vec<geopulse_core::model::EventRecord>)> {
    let c = Corpus::open(corpus)?;
    let ev = match events {
        Some(p) => geopulse_core::ingest::load_events(p)?,
        None => c.events()?,
    };
    Ok((c, ev))
}

fn load_dictionary(path: &Path) -> Result<Dictionary> {
    read_json(path).with_context(|| format!("reading dictionary {}", path.display()))
}

pub fn dict_build(a: DictBuildArgs) -> Result<()> {
    let (corpus, events) = load(&a.corpus, &a.events)?;
    let params = DictionaryParams {
        k: a.k,
        min_freq: a.min_freq,
        min_corr: a.min_corr,
        bucket_secs: a.bucket_secs,
    };
    let dict = build_dictionary(&corpus.posts, &events, &a.language, &a.seeds, &params)?;
    for t in &dict.seeds {
        println!("seed     {t}");
    }
    for t in &dict.learned {
        println!("learned  {:<20} r={:.3} n={}", t.term, t.score, t.frequency);
    }
    write_json(&a.out, &dict)
}

pub fn train(a: TrainArgs) -> Result<()> {
    let (corpus, events) = load(&a.w.corpus, &a.w.events)?;
    let dict = load_dictionary(&a.w.dictionary)?;
    let windows = corpus_windows(&corpus.posts, &events, &dict, a.w.window, a.w.bucket_secs)?;
    let hp = Hyperparameters {
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        l2: a.l2,
        threshold: a.threshold,
    };
    let (model, report) = train_model(&windows, &hp)?;
    let first = report.loss_history.first().copied().unwrap_or(f64::NAN);
    let last = report.loss_history.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained on {} windows ({} positive): loss {first:.4} -> {last:.4}",
        windows.len(),
        windows.iter().filter(|w| w.label).count()
    );
    write_json(&a.out, &model)
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let (corpus, events) = load(&a.w.corpus, &a.w.events)?;
    let dict = load_dictionary(&a.w.dictionary)?;
    let options = LoeoOptions {
        window: a.w.window,
        bucket_secs: a.w.bucket_secs,
        negative_ratio: a.negative_ratio,
        ..LoeoOptions::default()
    };
    let report = evaluate_loeo(&corpus.posts, &events, &dict, &options)?;
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
    for f in &report.folds {
        println!(
            "{:<16} test {:>5}  precision {:>5}  recall {:>5}",
            f.event_id,
            f.test_windows,
            fmt(f.precision),
            fmt(f.recall)
        );
    }
    println!("micro            precision {}  recall {}", fmt(report.precision), fmt(report.recall));
    if let Some(p) = &a.out {
        write_json(p, &report)?;
    }
    Ok(())
}
