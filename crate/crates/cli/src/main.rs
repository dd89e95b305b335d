mod pipeline;
mod trigger;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use geopulse_core::aggregate::{aggregate, export_choropleth, spearman, totals, write_csv, BucketWidth, UNASSIGNED};
use geopulse_core::geo::{resolve_post, Weights};
use geopulse_core::ingest::{load_gazetteer, load_impact, load_regions, Corpus};
use geopulse_core::pipeline::artifacts;
use geopulse_core::synth::{generate_to, SynthSpec};

#[derive(Parser)]
#[command(name = "geopulse", version, about = "Event sensing and filtering over social-media post streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a keyword dictionary from correlation with event spans.
    DictBuild(trigger::DictBuildArgs),
    /// Train the trigger classifier on every window of a corpus.
    TriggerTrain(trigger::TrainArgs),
    /// Leave-one-event-out evaluation of the trigger.
    TriggerEval(trigger::EvalArgs),
    /// Resolve post locations and print them as JSON lines.
    Geocode {
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to the corpus gazetteer.csv.
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a pipeline and persist its record.
    Run(pipeline::PipelineArgs),
    /// Run a pipeline and score it against a labeled sample.
    Evaluate(pipeline::PipelineArgs),
    /// Evaluate a pipeline over a grid of one parameter.
    Sweep(pipeline::SweepArgs),
    /// Reorder a pipeline to minimize expected cost per item.
    Optimize(pipeline::OptimizeArgs),
    /// Per-region counts and rates of a run's geolocated output.
    Aggregate(AggregateArgs),
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value_t = geopulse_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long)]
        data_root: PathBuf,
        /// Maximum number of concurrently executing runs.
        #[arg(long, default_value_t = geopulse_service::DEFAULT_MAX_RUNS)]
        max_runs: usize,
        /// Allowed CORS origin; any origin when omitted.
        #[arg(long)]
        ui_origin: Option<String>,
        /// Directory with the designer UI build, served at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AggregateArgs {
    /// Run directory (as written by `geopulse run`).
    #[arg(long)]
    run: PathBuf,
    /// Regions as CSV (region_id,name,population,polygon_wkt) or GeoJSON.
    #[arg(long)]
    regions: PathBuf,
    /// Reference impact CSV (region_id,affected); adds a rank correlation.
    #[arg(long)]
    impact: Option<PathBuf>,
    #[arg(long, default_value = "day")]
    bucket: BucketWidth,
    /// Output directory; defaults to the run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub(crate) fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn print_json(v: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(v)?) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn geocode(
    corpus: &Path,
    gazetteer: Option<PathBuf>,
    weights: Weights,
    out: Option<PathBuf>,
) -> Result<()> {
    let corpus = Corpus::open(corpus)?;
    let gaz = match gazetteer {
        Some(p) => load_gazetteer(&p)?,
        None => corpus.gazetteer()?,
    };
    let mut sink: Box<dyn Write> = match &out {
        Some(p) => Box::new(std::io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut resolved = 0;
    for post in &corpus.posts {
        if let Some(r) = resolve_post(post, &gaz, &weights) {
            serde_json::to_writer(&mut sink, &r)?;
            sink.write_all(b"\n")?;
            resolved += 1;
        }
    }
    sink.flush()?;
    eprintln!("resolved {resolved} of {} posts", corpus.posts.len());
    Ok(())
}

fn aggregate_cmd(a: AggregateArgs) -> Result<()> {
    let resolutions = artifacts::read_resolutions(&a.run)
        .with_context(|| format!("reading resolutions from {}", a.run.display()))?;
    let regions = load_regions(&a.regions)?;
    let rows = aggregate(&resolutions, &regions, a.bucket);
    let out = a.out.unwrap_or_else(|| a.run.clone());
    fs::create_dir_all(&out)?;
    let mut geo = export_choropleth(&rows, &regions);

    let t = totals(&rows);
    for r in &regions {
        println!("{:<24} {:>8}", r.region_id, t.get(&r.region_id).copied().unwrap_or(0));
    }
    println!("{:<24} {:>8}", UNASSIGNED, t.get(UNASSIGNED).copied().unwrap_or(0));

    if let Some(path) = &a.impact {
        let impact = load_impact(path)?;
        let counts = regions
            .iter()
            .map(|r| (r.region_id.clone(), t.get(&r.region_id).copied().unwrap_or(0) as f64))
            .collect();
        match spearman(&counts, &impact.affected) {
            Ok(s) => {
                println!("spearman rho {:.4} over {} regions", s.rho, s.n);
                if !s.excluded.is_empty() {
                    println!("excluded (present on one side only): {}", s.excluded.join(", "));
                }
                geo["metadata"]["spearman"] = serde_json::to_value(&s)?;
            }
            Err(e) => println!("spearman not computed: {e}"),
        }
        geo["metadata"]["impact"] = serde_json::to_value(&impact.affected)?;
    }
    write_json(&out.join("choropleth.geojson"), &geo)?;
    let csv_path = out.join("aggregate.csv");
    write_csv(fs::File::create(&csv_path)?, &rows)?;
    println!("wrote {} and {}", out.join("choropleth.geojson").display(), csv_path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { spec, out } => {
            let spec = SynthSpec::load(&spec)?;
            let summary = generate_to(&spec, &out)?;
            print_json(&summary)
        }
        Command::DictBuild(a) => trigger::dict_build(a),
        Command::TriggerTrain(a) => trigger::train(a),
        Command::TriggerEval(a) => trigger::eval(a),
        Command::Geocode {
            corpus,
            gazetteer,
            alpha,
            beta,
            out,
        } => geocode(&corpus, gazetteer, Weights { alpha, beta }, out),
        Command::Run(a) => pipeline::run(a),
        Command::Evaluate(a) => pipeline::evaluate(a),
        Command::Sweep(a) => pipeline::sweep(a),
        Command::Optimize(a) => pipeline::optimize(a),
        Command::Aggregate(a) => aggregate_cmd(a),
        Command::Serve {
            port,
            data_root,
            max_runs,
            ui_origin,
            static_dir,
        } => {
            let config = geopulse_service::ServiceConfig {
                data_root,
                max_runs,
                ui_origin,
                static_dir,
            };
            eprintln!("serving on port {port}, data root {}", config.data_root.display());
            tokio::runtime::Runtime::new()?.block_on(geopulse_service::serve(config, port))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
