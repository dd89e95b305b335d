//! File ingestion and validation.
//!
//! Post streams are noisy: bad lines become diagnostics and parsing carries
//! on. Reference data (gazetteer, events, regions, samples) must be trusted,
//! so any malformed row is a hard error carrying its line number.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    parse_utc, EventRecord, GazetteerEntry, GeoPoint, ImpactReference, LabeledSample, MediaRef,
    Post, Region,
};
use crate::text;
use crate::wkt::{Polygon, WktError};

pub const GAZETTEER_COLUMNS: [&str; 9] = [
    "entry_id",
    "canonical_name",
    "alt_names",
    "lat",
    "lon",
    "admin_level",
    "population",
    "country",
    "polygon_wkt",
];
pub const EVENT_COLUMNS: [&str; 6] = ["event_id", "event_type", "country", "start", "end", "name"];
pub const SAMPLE_COLUMNS: [&str; 2] = ["post_id", "relevant"];
pub const REGION_COLUMNS: [&str; 4] = ["region_id", "name", "population", "polygon_wkt"];
pub const IMPACT_COLUMNS: [&str; 2] = ["region_id", "affected"];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{file}: header mismatch, expected {expected:?}, found {found:?}")]
    Header {
        file: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("{file} line {line}: {reason}")]
    Row {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("{file}: {reason}")]
    Invalid { file: String, reason: String },
    #[error("sample references unknown posts: {}", .0.join(", "))]
    UnknownPosts(Vec<String>),
}

impl LoadError {
    fn row(file: &str, line: u64, reason: impl Into<String>) -> Self {
        LoadError::Row {
            file: file.to_string(),
            line,
            reason: reason.into(),
        }
    }
}

fn io_err(path: &Path, source: io::Error) -> LoadError {
    LoadError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Posts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub drop_reposts: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { drop_reposts: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedPosts {
    pub posts: Vec<Post>,
    pub diagnostics: Vec<Diagnostic>,
    pub reposts_dropped: usize,
}

#[derive(Deserialize)]
struct RawPost {
    id: String,
    created_at: String,
    lang: String,
    text: String,
    #[serde(default)]
    media: Vec<MediaRef>,
    #[serde(default)]
    native_geo: Option<GeoPoint>,
    #[serde(default)]
    is_repost: bool,
}

fn valid_lang(lang: &str) -> bool {
    lang == "und" || (lang.len() == 2 && lang.bytes().all(|b| b.is_ascii_lowercase()))
}

/// A media path must stay inside the media directory.
pub fn safe_media_path(path: &str) -> bool {
    let p = Path::new(path);
    !path.is_empty()
        && p.components().all(|c| matches!(c, Component::Normal(_)))
        && !path.contains('\\')
}

fn validate_post(raw: RawPost) -> Result<Post, String> {
    if raw.id.trim().is_empty() {
        return Err("empty id".into());
    }
    let created_at =
        parse_utc(&raw.created_at).ok_or_else(|| format!("bad created_at {:?}", raw.created_at))?;
    let lang = raw.lang.trim().to_ascii_lowercase();
    if !valid_lang(&lang) {
        return Err(format!("bad language code {:?}", raw.lang));
    }
    if let Some(g) = &raw.native_geo {
        if !(-90.0..=90.0).contains(&g.lat) || g.lat.is_nan() {
            return Err("latitude out of range".into());
        }
        if !(-180.0..=180.0).contains(&g.lon) || g.lon.is_nan() {
            return Err("longitude out of range".into());
        }
    }
    for m in &raw.media {
        if !safe_media_path(&m.path) {
            return Err(format!("media path escapes media directory: {:?}", m.path));
        }
    }
    Ok(Post {
        id: raw.id,
        created_at,
        lang,
        text: raw.text,
        media: raw.media,
        native_geo: raw.native_geo,
        is_repost: raw.is_repost,
    })
}

/// Parses a JSONL post stream. Only I/O failures are errors.
pub fn parse_posts<R: Read>(reader: R, opts: IngestOptions) -> io::Result<ParsedPosts> {
    let mut out = ParsedPosts::default();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawPost = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                out.diagnostics.push(Diagnostic {
                    line: lineno,
                    reason: format!("invalid record: {e}"),
                });
                continue;
            }
        };
        let post = match validate_post(raw) {
            Ok(p) => p,
            Err(reason) => {
                out.diagnostics.push(Diagnostic {
                    line: lineno,
                    reason,
                });
                continue;
            }
        };
        if !seen.insert(post.id.clone()) {
            out.diagnostics.push(Diagnostic {
                line: lineno,
                reason: format!("duplicate id {:?}", post.id),
            });
            continue;
        }
        if opts.drop_reposts && post.is_repost {
            out.reposts_dropped += 1;
            continue;
        }
        out.posts.push(post);
    }
    Ok(out)
}

pub fn write_posts<W: Write>(mut w: W, posts: &[Post]) -> io::Result<()> {
    for p in posts {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gazetteer
// ---------------------------------------------------------------------------

/// Gazetteer entries indexed by normalized name (see [`text::name_key`]).
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    index: HashMap<String, Vec<usize>>,
    max_name_tokens: usize,
}

impl Gazetteer {
    pub fn from_entries(entries: Vec<GazetteerEntry>) -> Result<Self, String> {
        let mut g = Gazetteer::default();
        let mut ids = HashSet::new();
        for (i, e) in entries.into_iter().enumerate() {
            if !ids.insert(e.entry_id.clone()) {
                return Err(format!("duplicate entry_id {:?}", e.entry_id));
            }
            let mut keys = Vec::new();
            for name in std::iter::once(&e.canonical_name).chain(e.alt_names.iter()) {
                let key = text::name_key(name)
                    .ok_or_else(|| format!("name {name:?} is empty after normalization"))?;
                if !keys.contains(&key) {
                    keys.push(key);
                }
            }
            for key in keys {
                g.max_name_tokens = g.max_name_tokens.max(key.split(' ').count());
                g.index.entry(key).or_default().push(i);
            }
            g.entries.push(e);
        }
        Ok(g)
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_name_tokens(&self) -> usize {
        self.max_name_tokens
    }

    /// Case-insensitive lookup of a place name.
    pub fn lookup(&self, name: &str) -> Vec<&GazetteerEntry> {
        text::name_key(name)
            .map(|k| self.lookup_key(&k))
            .unwrap_or_default()
    }

    /// Lookup by an already normalized key.
    pub fn lookup_key(&self, key: &str) -> Vec<&GazetteerEntry> {
        self.index
            .get(key)
            .map(|ix| ix.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    pub fn get(&self, entry_id: &str) -> Option<&GazetteerEntry> {
        self.entries.iter().find(|e| e.entry_id == entry_id)
    }
}

fn check_header(file: &str, rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<(), LoadError> {
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| LoadError::Invalid {
            file: file.into(),
            reason: e.to_string(),
        })?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if found != expected {
        return Err(LoadError::Header {
            file: file.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    Ok(())
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(r)
}

fn field<T: std::str::FromStr>(
    file: &str,
    line: u64,
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T, LoadError> {
    let raw = rec.get(idx).unwrap_or("").trim();
    raw.parse::<T>()
        .map_err(|_| LoadError::row(file, line, format!("bad {name} {raw:?}")))
}

fn records<'a, R: Read>(
    file: &str,
    rdr: &'a mut csv::Reader<R>,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord), LoadError>> + 'a {
    let file = file.to_string();
    rdr.records().map(move |r| {
        r.map(|rec| (rec.position().map(|p| p.line()).unwrap_or(0), rec))
            .map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                LoadError::row(&file, line, e.to_string())
            })
    })
}

pub fn read_gazetteer<R: Read>(reader: R, file: &str) -> Result<Gazetteer, LoadError> {
    let mut rdr = csv_reader(reader);
    check_header(file, &mut rdr, &GAZETTEER_COLUMNS)?;
    let mut entries = Vec::new();
    for rec in records(file, &mut rdr) {
        let (line, rec) = rec?;
        let entry_id = rec[0].trim().to_string();
        if entry_id.is_empty() {
            return Err(LoadError::row(file, line, "empty entry_id"));
        }
        let canonical_name = rec[1].trim().to_string();
        let alt_names: Vec<String> = rec[2]
            .split('|')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let lat: f64 = field(file, line, &rec, 3, "lat")?;
        let lon: f64 = field(file, line, &rec, 4, "lon")?;
        if !GeoPoint::new(lat, lon).in_bounds() {
            return Err(LoadError::row(file, line, "coordinates out of range"));
        }
        let admin_level: u8 = field(file, line, &rec, 5, "admin_level")?;
        if !(1..=10).contains(&admin_level) {
            return Err(LoadError::row(
                file,
                line,
                format!("admin_level {admin_level} outside 1..10"),
            ));
        }
        let population: u64 = field(file, line, &rec, 6, "population")?;
        let country = rec[7].trim().to_ascii_uppercase();
        if country.len() != 2 || !country.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(LoadError::row(file, line, format!("bad country code {:?}", &rec[7])));
        }
        let wkt = rec[8].trim();
        let polygon = if wkt.is_empty() {
            None
        } else {
            Some(Polygon::parse(wkt).map_err(|e| LoadError::row(file, line, e.to_string()))?)
        };
        for name in std::iter::once(&canonical_name).chain(alt_names.iter()) {
            if text::name_key(name).is_none() {
                return Err(LoadError::row(
                    file,
                    line,
                    format!("name {name:?} is empty after normalization"),
                ));
            }
        }
        entries.push((
            line,
            GazetteerEntry {
                entry_id,
                canonical_name,
                alt_names,
                lat,
                lon,
                admin_level,
                population,
                country,
                polygon,
            },
        ));
    }
    let mut seen = HashSet::new();
    for (line, e) in &entries {
        if !seen.insert(e.entry_id.as_str()) {
            return Err(LoadError::row(file, *line, format!("duplicate entry_id {:?}", e.entry_id)));
        }
    }
    Gazetteer::from_entries(entries.into_iter().map(|(_, e)| e).collect()).map_err(|reason| {
        LoadError::Invalid {
            file: file.into(),
            reason,
        }
    })
}

pub fn load_gazetteer(path: &Path) -> Result<Gazetteer, LoadError> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    read_gazetteer(f, &path.display().to_string())
}

pub fn write_gazetteer<W: Write>(w: W, entries: &[GazetteerEntry]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(GAZETTEER_COLUMNS)?;
    for e in entries {
        wtr.write_record([
            e.entry_id.clone(),
            e.canonical_name.clone(),
            e.alt_names.join("|"),
            e.lat.to_string(),
            e.lon.to_string(),
            e.admin_level.to_string(),
            e.population.to_string(),
            e.country.clone(),
            e.polygon.as_ref().map(|p| p.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Events, regions, samples, impact
// ---------------------------------------------------------------------------

pub fn read_events<R: Read>(reader: R, file: &str) -> Result<Vec<EventRecord>, LoadError> {
    let mut rdr = csv_reader(reader);
    check_header(file, &mut rdr, &EVENT_COLUMNS)?;
    let mut out: Vec<EventRecord> = Vec::new();
    for rec in records(file, &mut rdr) {
        let (line, rec) = rec?;
        let ts = |i: usize, name: &str| {
            parse_utc(&rec[i]).ok_or_else(|| LoadError::row(file, line, format!("bad {name} {:?}", &rec[i])))
        };
        let ev = EventRecord {
            event_id: rec[0].trim().to_string(),
            event_type: rec[1].trim().to_string(),
            country: rec[2].trim().to_ascii_uppercase(),
            start: ts(3, "start")?,
            end: ts(4, "end")?,
            name: rec[5].trim().to_string(),
        };
        if ev.event_id.is_empty() {
            return Err(LoadError::row(file, line, "empty event_id"));
        }
        if ev.start >= ev.end {
            return Err(LoadError::row(file, line, "event start must precede end"));
        }
        if out.iter().any(|e| e.event_id == ev.event_id) {
            return Err(LoadError::row(file, line, format!("duplicate event_id {:?}", ev.event_id)));
        }
        out.push(ev);
    }
    Ok(out)
}

pub fn load_events(path: &Path) -> Result<Vec<EventRecord>, LoadError> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    read_events(f, &path.display().to_string())
}

pub fn write_events<W: Write>(w: W, events: &[EventRecord]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(EVENT_COLUMNS)?;
    for e in events {
        wtr.write_record([
            e.event_id.as_str(),
            e.event_type.as_str(),
            e.country.as_str(),
            &crate::model::format_utc(&e.start),
            &crate::model::format_utc(&e.end),
            e.name.as_str(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_regions_csv<R: Read>(reader: R, file: &str) -> Result<Vec<Region>, LoadError> {
    let mut rdr = csv_reader(reader);
    check_header(file, &mut rdr, &REGION_COLUMNS)?;
    let mut out: Vec<Region> = Vec::new();
    for rec in records(file, &mut rdr) {
        let (line, rec) = rec?;
        let population: u64 = field(file, line, &rec, 2, "population")?;
        let polygon = Polygon::parse(&rec[3]).map_err(|e| LoadError::row(file, line, e.to_string()))?;
        let region = Region {
            region_id: rec[0].trim().to_string(),
            name: rec[1].trim().to_string(),
            polygon,
            population,
        };
        validate_region(&region).map_err(|r| LoadError::row(file, line, r))?;
        if out.iter().any(|r| r.region_id == region.region_id) {
            return Err(LoadError::row(file, line, format!("duplicate region_id {:?}", region.region_id)));
        }
        out.push(region);
    }
    Ok(out)
}

fn validate_region(r: &Region) -> Result<(), String> {
    if r.region_id.is_empty() {
        return Err("empty region_id".into());
    }
    if r.region_id == crate::aggregate::UNASSIGNED {
        return Err(format!("region_id {:?} is reserved", r.region_id));
    }
    if r.population == 0 {
        return Err("population must be positive".into());
    }
    Ok(())
}

/// Regions from a GeoJSON FeatureCollection of `Polygon` features with
/// `region_id`, `name` and `population` properties.
pub fn read_regions_geojson(raw: &str, file: &str) -> Result<Vec<Region>, LoadError> {
    let invalid = |reason: String| LoadError::Invalid {
        file: file.into(),
        reason,
    };
    let doc: serde_json::Value = serde_json::from_str(raw).map_err(|e| invalid(e.to_string()))?;
    let features = doc
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or_else(|| invalid("not a FeatureCollection".into()))?;
    let mut out: Vec<Region> = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let ctx = |r: String| invalid(format!("feature {i}: {r}"));
        let props = f.get("properties").ok_or_else(|| ctx("missing properties".into()))?;
        let geom = f.get("geometry").ok_or_else(|| ctx("missing geometry".into()))?;
        if geom.get("type").and_then(|t| t.as_str()) != Some("Polygon") {
            return Err(ctx("geometry must be a Polygon".into()));
        }
        let rings: Vec<Vec<(f64, f64)>> = serde_json::from_value(
            geom.get("coordinates").cloned().unwrap_or_default(),
        )
        .map_err(|e| ctx(e.to_string()))?;
        let mut rings = rings.into_iter();
        let exterior = rings.next().ok_or_else(|| ctx("polygon has no rings".into()))?;
        let mut polygon = Polygon::new(exterior).map_err(|e: WktError| ctx(e.to_string()))?;
        for h in rings {
            let hole = Polygon::new(h).map_err(|e| ctx(e.to_string()))?;
            polygon.holes.push(hole.exterior);
        }
        let region = Region {
            region_id: props
                .get("region_id")
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string(),
            name: props
                .get("name")
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string(),
            population: props
                .get("population")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| ctx("population must be a non-negative integer".into()))?,
            polygon,
        };
        validate_region(&region).map_err(ctx)?;
        if out.iter().any(|r| r.region_id == region.region_id) {
            return Err(ctx(format!("duplicate region_id {:?}", region.region_id)));
        }
        out.push(region);
    }
    Ok(out)
}

/// Loads regions from a WKT CSV, or from GeoJSON when the extension is
/// `.geojson` or `.json`.
pub fn load_regions(path: &Path) -> Result<Vec<Region>, LoadError> {
    let name = path.display().to_string();
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext.eq_ignore_ascii_case("geojson") || ext.eq_ignore_ascii_case("json") {
        let raw = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        read_regions_geojson(&raw, &name)
    } else {
        let f = File::open(path).map_err(|e| io_err(path, e))?;
        read_regions_csv(f, &name)
    }
}

pub fn write_regions<W: Write>(w: W, regions: &[Region]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(REGION_COLUMNS)?;
    for r in regions {
        wtr.write_record([
            r.region_id.clone(),
            r.name.clone(),
            r.population.to_string(),
            r.polygon.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a labeled sample; every post id must be in `known_posts`.
pub fn read_sample<R: Read>(
    reader: R,
    file: &str,
    sample_id: &str,
    known_posts: &HashSet<&str>,
) -> Result<LabeledSample, LoadError> {
    let mut rdr = csv_reader(reader);
    check_header(file, &mut rdr, &SAMPLE_COLUMNS)?;
    let mut labels = BTreeMap::new();
    let mut missing = Vec::new();
    for rec in records(file, &mut rdr) {
        let (line, rec) = rec?;
        let id = rec[0].trim().to_string();
        let relevant = match rec[1].trim() {
            "1" => true,
            "0" => false,
            other => return Err(LoadError::row(file, line, format!("relevant must be 0 or 1, got {other:?}"))),
        };
        if !known_posts.contains(id.as_str()) {
            missing.push(id.clone());
        }
        if labels.insert(id.clone(), relevant).is_some() {
            return Err(LoadError::row(file, line, format!("duplicate post_id {id:?}")));
        }
    }
    if !missing.is_empty() {
        return Err(LoadError::UnknownPosts(missing));
    }
    Ok(LabeledSample {
        sample_id: sample_id.to_string(),
        labels,
    })
}

pub fn load_sample(path: &Path, known_posts: &HashSet<&str>) -> Result<LabeledSample, LoadError> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sample")
        .to_string();
    read_sample(f, &path.display().to_string(), &id, known_posts)
}

pub fn write_sample<W: Write>(w: W, sample: &LabeledSample) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SAMPLE_COLUMNS)?;
    for (id, rel) in &sample.labels {
        wtr.write_record([id.as_str(), if *rel { "1" } else { "0" }])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_impact<R: Read>(reader: R, file: &str) -> Result<ImpactReference, LoadError> {
    let mut rdr = csv_reader(reader);
    check_header(file, &mut rdr, &IMPACT_COLUMNS)?;
    let mut affected = BTreeMap::new();
    for rec in records(file, &mut rdr) {
        let (line, rec) = rec?;
        let v: f64 = field(file, line, &rec, 1, "affected")?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(LoadError::row(file, line, "affected must be non-negative"));
        }
        if affected.insert(rec[0].trim().to_string(), v).is_some() {
            return Err(LoadError::row(file, line, format!("duplicate region_id {:?}", &rec[0])));
        }
    }
    Ok(ImpactReference { affected })
}

pub fn load_impact(path: &Path) -> Result<ImpactReference, LoadError> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    read_impact(f, &path.display().to_string())
}

pub fn write_impact<W: Write>(w: W, impact: &ImpactReference) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(IMPACT_COLUMNS)?;
    for (id, v) in &impact.affected {
        wtr.write_record([id.clone(), v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Corpus directory
// ---------------------------------------------------------------------------

/// Standard file names inside a corpus directory.
pub mod layout {
    pub const POSTS: &str = "posts.jsonl";
    pub const MEDIA_DIR: &str = "media";
    pub const EVENTS: &str = "events.csv";
    pub const SAMPLE: &str = "sample.csv";
    pub const GAZETTEER: &str = "gazetteer.csv";
    pub const REGIONS: &str = "regions.csv";
    pub const IMPACT: &str = "impact.csv";
}

/// A loaded post stream plus the location of its media.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub posts: Vec<Post>,
    pub diagnostics: Vec<Diagnostic>,
    pub reposts_dropped: usize,
}

impl Corpus {
    pub fn open(root: &Path) -> Result<Self, LoadError> {
        Self::open_with(root, IngestOptions::default())
    }

    pub fn open_with(root: &Path, opts: IngestOptions) -> Result<Self, LoadError> {
        let path = root.join(layout::POSTS);
        let f = File::open(&path).map_err(|e| io_err(&path, e))?;
        let parsed = parse_posts(f, opts).map_err(|e| io_err(&path, e))?;
        Ok(Corpus {
            root: root.to_path_buf(),
            posts: parsed.posts,
            diagnostics: parsed.diagnostics,
            reposts_dropped: parsed.reposts_dropped,
        })
    }

    /// In-memory corpus (media paths resolve under `root/media`).
    pub fn from_posts(root: &Path, posts: Vec<Post>) -> Self {
        Corpus {
            root: root.to_path_buf(),
            posts,
            diagnostics: Vec::new(),
            reposts_dropped: 0,
        }
    }

    pub fn media_dir(&self) -> PathBuf {
        self.root.join(layout::MEDIA_DIR)
    }

    pub fn media_path(&self, m: &MediaRef) -> Option<PathBuf> {
        safe_media_path(&m.path).then(|| self.media_dir().join(&m.path))
    }

    pub fn post_ids(&self) -> HashSet<&str> {
        self.posts.iter().map(|p| p.id.as_str()).collect()
    }

    pub fn events(&self) -> Result<Vec<EventRecord>, LoadError> {
        load_events(&self.root.join(layout::EVENTS))
    }

    pub fn gazetteer(&self) -> Result<Gazetteer, LoadError> {
        load_gazetteer(&self.root.join(layout::GAZETTEER))
    }

    pub fn regions(&self) -> Result<Vec<Region>, LoadError> {
        load_regions(&self.root.join(layout::REGIONS))
    }

    pub fn sample(&self) -> Result<LabeledSample, LoadError> {
        load_sample(&self.root.join(layout::SAMPLE), &self.post_ids())
    }

    pub fn impact(&self) -> Result<ImpactReference, LoadError> {
        load_impact(&self.root.join(layout::IMPACT))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, extra: &str) -> String {
        format!(
            r#"{{"id":"{id}","created_at":"2021-09-26T10:05:00Z","lang":"en","text":"flood here"{extra}}}"#
        )
    }

    #[test]
    fn empty_stream() {
        let p = parse_posts(&b""[..], IngestOptions::default()).unwrap();
        assert!(p.posts.is_empty());
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn valid_lines_keep_order() {
        let input = [line("c", ""), line("a", ""), line("b", "")].join("\n");
        let p = parse_posts(input.as_bytes(), IngestOptions::default()).unwrap();
        let ids: Vec<_> = p.posts.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn latitude_out_of_range() {
        let input = line("a", r#","native_geo":{"lat":95.0,"lon":10.0}"#);
        let p = parse_posts(input.as_bytes(), IngestOptions::default()).unwrap();
        assert!(p.posts.is_empty());
        assert_eq!(p.diagnostics.len(), 1);
        assert_eq!(p.diagnostics[0].line, 1);
        assert_eq!(p.diagnostics[0].reason, "latitude out of range");
    }

    #[test]
    fn duplicates_and_garbage_become_diagnostics() {
        let input = [line("a", ""), "not json".to_string(), line("a", "")].join("\n");
        let p = parse_posts(input.as_bytes(), IngestOptions::default()).unwrap();
        assert_eq!(p.posts.len(), 1);
        let lines: Vec<_> = p.diagnostics.iter().map(|d| d.line).collect();
        assert_eq!(lines, [2, 3]);
        assert!(p.diagnostics[1].reason.contains("duplicate"));
    }

    #[test]
    fn timestamps_normalized() {
        let input = r#"{"id":"a","created_at":"2021-09-26T12:05:07.913+02:00","lang":"EN","text":""}"#;
        let p = parse_posts(input.as_bytes(), IngestOptions::default()).unwrap();
        assert_eq!(crate::model::format_utc(&p.posts[0].created_at), "2021-09-26T10:05:07Z");
        assert_eq!(p.posts[0].lang, "en");
    }

    #[test]
    fn media_traversal_rejected() {
        let input = line("a", r#","media":[{"media_id":"m","path":"../etc/passwd"}]"#);
        let p = parse_posts(input.as_bytes(), IngestOptions::default()).unwrap();
        assert!(p.posts.is_empty());
        assert!(p.diagnostics[0].reason.contains("escapes"));
    }

    #[test]
    fn reposts_dropped_by_default() {
        let input = [line("a", r#","is_repost":true"#), line("b", "")].join("\n");
        let p = parse_posts(input.as_bytes(), IngestOptions::default()).unwrap();
        assert_eq!(p.posts.len(), 1);
        assert_eq!(p.reposts_dropped, 1);
        let p = parse_posts(input.as_bytes(), IngestOptions { drop_reposts: false }).unwrap();
        assert_eq!(p.posts.len(), 2);
    }

    const GAZ_HEADER: &str = "entry_id,canonical_name,alt_names,lat,lon,admin_level,population,country,polygon_wkt\n";

    #[test]
    fn gazetteer_casefold_lookup() {
        let csv = format!("{GAZ_HEADER}fr-paris,Paris,\"paris, tx\",48.8566,2.3522,8,2100000,FR,\n");
        let g = read_gazetteer(csv.as_bytes(), "g.csv").unwrap();
        assert_eq!(g.lookup("PARIS")[0].entry_id, "fr-paris");
        assert_eq!(g.lookup("Paris, TX")[0].entry_id, "fr-paris");
        assert!(g.lookup("London").is_empty());
    }

    #[test]
    fn gazetteer_empty_with_header() {
        let g = read_gazetteer(GAZ_HEADER.as_bytes(), "g.csv").unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn gazetteer_bad_admin_level() {
        let csv = format!(
            "{GAZ_HEADER}a,Alpha,,1,1,8,10,FR,\nb,Beta,,1,1,11,10,FR,\n"
        );
        match read_gazetteer(csv.as_bytes(), "g.csv") {
            Err(LoadError::Row { line, reason, .. }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("admin_level"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gazetteer_header_mismatch() {
        let err = read_gazetteer("id,name\n".as_bytes(), "g.csv").unwrap_err();
        assert!(matches!(err, LoadError::Header { .. }));
    }

    #[test]
    fn event_end_before_start() {
        let csv = "event_id,event_type,country,start,end,name\ne1,flood,NP,2021-06-10T00:00:00Z,2021-06-09T00:00:00Z,x\n";
        assert!(matches!(read_events(csv.as_bytes(), "e.csv"), Err(LoadError::Row { line: 2, .. })));
    }

    #[test]
    fn sample_with_two_labels() {
        let known: HashSet<&str> = ["a", "b", "c"].into_iter().collect();
        let s = read_sample("post_id,relevant\na,1\nb,0\n".as_bytes(), "s.csv", "s", &known).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.label("a"), Some(true));
    }

    #[test]
    fn sample_unknown_posts_listed() {
        let known: HashSet<&str> = ["a"].into_iter().collect();
        let err = read_sample("post_id,relevant\na,1\nx,0\ny,1\n".as_bytes(), "s.csv", "s", &known)
            .unwrap_err();
        match err {
            LoadError::UnknownPosts(ids) => assert_eq!(ids, ["x", "y"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn region_open_ring() {
        let csv = "region_id,name,population,polygon_wkt\nr1,R,100,\"POLYGON ((0 0, 1 0, 1 1, 0 1))\"\n";
        let err = read_regions_csv(csv.as_bytes(), "r.csv").unwrap_err();
        assert!(err.to_string().contains("ring not closed"), "{err}");
    }

    #[test]
    fn region_geojson() {
        let raw = r#"{"type":"FeatureCollection","features":[{"type":"Feature",
            "properties":{"region_id":"r1","name":"One","population":500},
            "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]}"#;
        let r = read_regions_geojson(raw, "r.geojson").unwrap();
        assert_eq!(r[0].population, 500);
        assert!(r[0].polygon.contains(0.5, 0.5));
    }
}
