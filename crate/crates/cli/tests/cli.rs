use std::fs;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use geopulse_core::ingest::{load_regions, Corpus};
use geopulse_core::pipeline::{artifacts, case_study_config, evaluate, run, validate, EvalMetrics, PipelineConfig};

const SPEC: &str = r#"{
  "seed": 31,
  "start": "2021-07-01T00:00:00Z",
  "duration_hours": 72,
  "base_rate": 12,
  "languages": [{"code": "en", "weight": 1.0}],
  "events": [
    {"event_id": "a", "country": "NP", "start": "2021-07-01T18:00:00Z", "end": "2021-07-02T06:00:00Z",
     "boost": {"flood": 12}, "center": {"lat": 28.7, "lon": 81.0}, "sigma_km": 20, "geo_fraction": 0.9,
     "rate_multiplier": 2},
    {"event_id": "b", "country": "NP", "start": "2021-07-02T20:00:00Z", "end": "2021-07-03T08:00:00Z",
     "boost": {"flood": 12}, "center": {"lat": 28.1, "lon": 84.2}, "sigma_km": 20, "geo_fraction": 0.9,
     "rate_multiplier": 2}
  ],
  "duplicate_fraction": 0.2,
  "nonphoto_fraction": 0.2,
  "media_fraction": 0.5,
  "event_media_fraction": 0.8,
  "background_geo_fraction": 0.1,
  "regions": [
    {"region_id": "w", "name": "West", "population": 3000000, "bbox": [80.0, 26.2, 83.0, 30.5]},
    {"region_id": "e", "name": "East", "population": 5000000, "bbox": [83.0, 26.2, 88.3, 30.5]}
  ]
}"#;

fn geopulse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geopulse"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = geopulse(args);
    assert!(
        out.status.success(),
        "geopulse {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Setup {
    dir: tempfile::TempDir,
}

impl Setup {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("spec.json"), SPEC).unwrap();
        ok(&["synth", "--spec", s(&dir.path().join("spec.json")), "--out", s(&dir.path().join("corpus"))]);
        Setup { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write_config(&self, name: &str, c: &PipelineConfig) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, c.to_json()).unwrap();
        p
    }
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            for (n, b) in files_of(&p) {
                out.push((format!("{}/{n}", p.file_name().unwrap().to_string_lossy()), b));
            }
        } else {
            out.push((p.file_name().unwrap().to_string_lossy().into(), fs::read(&p).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn synth_is_byte_identical_across_invocations() {
    let st = Setup::new();
    let again = st.path("again");
    let summary = ok(&["synth", "--spec", s(&st.path("spec.json")), "--out", s(&again)]);
    let v: Value = serde_json::from_str(&summary).unwrap();
    assert!(v["posts"].as_u64().unwrap() > 0);
    assert_eq!(files_of(&st.path("corpus")), files_of(&again));
}

#[test]
fn run_persists_record_and_matches_library() {
    let st = Setup::new();
    let cfg = st.write_config("cfg.json", &case_study_config());
    let out = st.path("run");
    let stdout = ok(&["run", "--config", s(&cfg), "--corpus", s(&st.path("corpus")), "--out", s(&out)]);
    assert!(stdout.contains("precision"));

    let corpus = Corpus::open(&st.path("corpus")).unwrap();
    let record = run(&validate(case_study_config()).unwrap(), &corpus).unwrap();
    let direct = evaluate(&record, &corpus.sample().unwrap());

    let lines = fs::read_to_string(out.join("record.jsonl")).unwrap().lines().count();
    assert_eq!(lines, record.total);
    let persisted = artifacts::read_metrics(&out).unwrap().unwrap();
    assert_eq!(persisted.without_timings(), direct.without_timings());
    assert_eq!(artifacts::read_resolutions(&out).unwrap(), record.resolutions);
}

#[test]
fn evaluate_prints_metrics_json() {
    let st = Setup::new();
    let mut c = case_study_config();
    c.corpus = Some("corpus".into());
    c.sample = Some("corpus/sample.csv".into());
    let cfg = st.write_config("cfg.json", &c);
    let m: EvalMetrics = serde_json::from_str(&ok(&["evaluate", "--config", s(&cfg)])).unwrap();
    assert!(m.total > 0);
    assert_eq!(m.kept + m.removed, m.total);
}

#[test]
fn sweep_writes_one_row_per_grid_value() {
    let st = Setup::new();
    let cfg = st.write_config("cfg.json", &case_study_config());
    let out = st.path("sweep");
    ok(&[
        "sweep", "--config", s(&cfg), "--corpus", s(&st.path("corpus")), "--component", "photo", "--grid",
        "0,0.5,1", "--out", s(&out),
    ]);
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let rows: Value = serde_json::from_str(&fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    let kept: Vec<u64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["metrics"]["kept"].as_u64().unwrap())
        .collect();
    assert!(kept.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn optimize_reorders_declared_costs() {
    let st = Setup::new();
    let mut c = case_study_config();
    c.cost_model = serde_json::from_value(json!({
        "dedup": {"cost_ms": 5.0, "selectivity": 0.95},
        "photo": {"cost_ms": 1.0, "selectivity": 0.4},
        "nsfw": {"cost_ms": 1.0, "selectivity": 1.0},
        "geolocate": {"cost_ms": 1.0, "selectivity": 0.5}
    }))
    .unwrap();
    let cfg = st.write_config("cfg.json", &c);
    let out = st.path("opt");
    let stdout = ok(&["optimize", "--config", s(&cfg), "--out", s(&out)]);
    assert!(stdout.contains("exhaustive"), "{stdout}");
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("optimize.json")).unwrap()).unwrap();
    assert!(report["ratio"].as_f64().unwrap() < 1.0);
    let new_cfg = fs::read(out.join("config.json")).unwrap();
    let p = geopulse_core::pipeline::parse_config(&new_cfg).unwrap();
    // dedup is stateful, so it stays first
    assert_eq!(p.ids()[0], "dedup");

    let bare = st.write_config("bare.json", &case_study_config());
    let res = geopulse(&["optimize", "--config", s(&bare)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("no cost data"));
}

#[test]
fn invalid_config_fails_with_diagnostic() {
    let st = Setup::new();
    let p = st.path("bad.json");
    fs::write(&p, r#"{"components": [{"id": "blur"}]}"#).unwrap();
    let res = geopulse(&["evaluate", "--config", s(&p), "--corpus", s(&st.path("corpus"))]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("unknown component_id"));
}

#[test]
fn aggregate_conserves_resolutions() {
    let st = Setup::new();
    let cfg = st.write_config("cfg.json", &case_study_config());
    let corpus = st.path("corpus");
    let run_dir = st.path("run");
    ok(&["run", "--config", s(&cfg), "--corpus", s(&corpus), "--out", s(&run_dir)]);
    let stdout = ok(&[
        "aggregate", "--run", s(&run_dir), "--regions", s(&corpus.join("regions.csv")), "--impact",
        s(&corpus.join("impact.csv")), "--bucket", "day",
    ]);
    assert!(stdout.contains("spearman"), "{stdout}");
    let geo: Value = serde_json::from_str(&fs::read_to_string(run_dir.join("choropleth.geojson")).unwrap()).unwrap();
    let regions = load_regions(&corpus.join("regions.csv")).unwrap();
    assert_eq!(geo["features"].as_array().unwrap().len(), regions.len());
    let counted: u64 = geo["features"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["properties"]["count"].as_u64().unwrap())
        .sum();
    let total = artifacts::read_resolutions(&run_dir).unwrap().len() as u64;
    assert_eq!(counted + geo["metadata"]["unassigned"].as_u64().unwrap(), total);
    let csv = fs::read_to_string(run_dir.join("aggregate.csv")).unwrap();
    assert!(csv.starts_with("region_id,bucket,count,rate_per_100k"));

    let res = geopulse(&["aggregate", "--run", s(&run_dir), "--regions", "x.csv", "--bucket", "week"]);
    assert!(!res.status.success());
}

#[test]
fn trigger_commands_chain() {
    let st = Setup::new();
    let corpus = st.path("corpus");
    let dict = st.path("dict.json");
    ok(&[
        "dict-build", "--corpus", s(&corpus), "--language", "en", "--seeds", "flood", "--min-freq", "10", "--out",
        s(&dict),
    ]);
    let d: Value = serde_json::from_str(&fs::read_to_string(&dict).unwrap()).unwrap();
    assert_eq!(d["seeds"], json!(["flood"]));

    let model = st.path("model.json");
    let out = ok(&["trigger-train", "--corpus", s(&corpus), "--dictionary", s(&dict), "-W", "6", "--out", s(&model)]);
    assert!(out.contains("trained on"));
    let m: Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(m["window"], 6);

    let report = st.path("loeo.json");
    let out = ok(&["trigger-eval", "--corpus", s(&corpus), "--dictionary", s(&dict), "-W", "6", "--out", s(&report)]);
    assert!(out.contains("micro"));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["folds"].as_array().unwrap().len(), 2);
}

#[test]
fn geocode_emits_resolution_lines() {
    let st = Setup::new();
    let corpus = st.path("corpus");
    let stdout = ok(&["geocode", "--corpus", s(&corpus), "--gazetteer", s(&corpus.join("gazetteer.csv"))]);
    let mut n = 0;
    for line in stdout.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        for key in ["post_id", "places", "objective", "method"] {
            assert!(v.get(key).is_some(), "{key} missing in {line}");
        }
        for p in v["places"].as_array().unwrap() {
            for key in ["entry_id", "lat", "lon", "provenance"] {
                assert!(p.get(key).is_some(), "{key} missing in {line}");
            }
        }
        n += 1;
    }
    assert!(n > 0);
}

fn http_get(port: u16, path: &str) -> Option<(u16, String)> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    stream.set_read_timeout(Some(Duration::from_secs(10))).ok()?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut raw = String::new();
    stream.read_to_string(&mut raw).ok()?;
    let status = raw.split_whitespace().nth(1)?.parse().ok()?;
    Some((status, raw))
}

#[test]
fn serve_answers_over_http() {
    let st = Setup::new();
    let root = st.path("data");
    fs::create_dir_all(root.join("corpora")).unwrap();
    fs::rename(st.path("corpus"), root.join("corpora").join("demo")).unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_geopulse"))
        .args(["serve", "--port", &port.to_string(), "--data-root", s(&root)])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(30);
    let mut answer = None;
    while Instant::now() < deadline {
        if let Some(a) = http_get(port, "/api/components") {
            answer = Some(a);
            break;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    let missing = http_get(port, "/api/runs/unknown");
    child.kill().unwrap();
    child.wait().unwrap();

    let (status, body) = answer.expect("service did not come up");
    assert_eq!(status, 200);
    assert!(body.contains("photo-entropy"));
    let (status, body) = missing.unwrap();
    assert_eq!(status, 404);
    assert!(body.contains("not_found"));
}
