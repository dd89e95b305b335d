//! Deterministic synthetic corpora.
//!
//! A background stream of posts is drawn from bundled per-language word
//! lists. Inside each event window the event's boosted terms appear at
//! their background frequency times the boost factor, and posts carrying
//! them are geolocated around the event's cluster center. All randomness
//! comes from one [`XorShift64Star`] seeded by the spec, consumed in a fixed
//! order, so the same spec always produces byte-identical files.

mod images;
mod places;
pub mod words;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use images::{ImageKind, HEIGHT as IMAGE_HEIGHT, WIDTH as IMAGE_WIDTH};
pub use places::{all as bundled_gazetteer, subset as gazetteer_subset};

use crate::aggregate::UNASSIGNED;
use crate::geo::{haversine, EARTH_RADIUS_KM};
use crate::ingest::{self, layout};
use crate::media::LuminanceImage;
use crate::model::{
    EventRecord, GazetteerEntry, GeoPoint, ImpactReference, LabeledSample, MediaRef, Post, Region,
};
use crate::rng::XorShift64Star;
use crate::wkt::Polygon;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    Invalid(String),
    #[error("cannot parse synth spec: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageWeight {
    pub code: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub event_id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_event_type")]
    pub event_type: String,
    pub country: String,
    #[serde(with = "crate::model::utc_seconds")]
    pub start: DateTime<Utc>,
    #[serde(with = "crate::model::utc_seconds")]
    pub end: DateTime<Utc>,
    /// Normalized term → multiplicative boost of its per-post frequency.
    pub boost: BTreeMap<String, f64>,
    pub center: GeoPoint,
    pub sigma_km: f64,
    /// Share of event posts that carry a location.
    #[serde(default = "default_geo_fraction")]
    pub geo_fraction: f64,
    /// Post-rate multiplier inside the window.
    #[serde(default = "one")]
    pub rate_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub region_id: String,
    pub name: String,
    pub population: u64,
    /// `[min_lon, min_lat, max_lon, max_lat]`.
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    #[serde(with = "crate::model::utc_seconds", default = "default_start")]
    pub start: DateTime<Utc>,
    pub duration_hours: u32,
    /// Mean posts per hour outside events.
    pub base_rate: f64,
    pub languages: Vec<LanguageWeight>,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    #[serde(default)]
    pub duplicate_fraction: f64,
    #[serde(default)]
    pub nonphoto_fraction: f64,
    /// Share of background posts with one image.
    #[serde(default = "default_media_fraction")]
    pub media_fraction: f64,
    /// Share of event posts with one image.
    #[serde(default = "default_event_media_fraction")]
    pub event_media_fraction: f64,
    /// Share of background posts mentioning a random gazetteer place.
    #[serde(default = "default_background_geo")]
    pub background_geo_fraction: f64,
    /// Share of located posts whose location is a native geotag rather than
    /// a place mention.
    #[serde(default = "default_native_fraction")]
    pub native_geo_fraction: f64,
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
}

fn default_event_type() -> String {
    "flood".into()
}
fn default_geo_fraction() -> f64 {
    0.7
}
fn one() -> f64 {
    1.0
}
fn default_start() -> DateTime<Utc> {
    crate::model::parse_utc("2021-06-01T00:00:00Z").expect("constant")
}
fn default_media_fraction() -> f64 {
    0.3
}
fn default_event_media_fraction() -> f64 {
    0.5
}
fn default_background_geo() -> f64 {
    0.05
}
fn default_native_fraction() -> f64 {
    0.2
}

/// Frequency of a boosted term that is absent from a language's word list.
const FOREIGN_TERM_BASE: f64 = 0.005;
const MIN_WORDS: usize = 5;
const MAX_WORDS: usize = 12;

impl SynthSpec {
    pub fn from_json(raw: &str) -> Result<Self, SynthError> {
        let spec: SynthSpec = serde_json::from_str(raw)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(m));
        if self.duration_hours == 0 {
            return bad("duration_hours must be positive".into());
        }
        if !(self.base_rate.is_finite() && self.base_rate >= 0.0) {
            return bad("base_rate must be non-negative".into());
        }
        if self.languages.is_empty() {
            return bad("at least one language is required".into());
        }
        if self.languages.iter().any(|l| l.weight.is_nan() || l.weight < 0.0) {
            return bad("language weights must be non-negative".into());
        }
        let total: f64 = self.languages.iter().map(|l| l.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("language weights sum to {total}, expected 1"));
        }
        for (name, v) in [
            ("duplicate_fraction", self.duplicate_fraction),
            ("nonphoto_fraction", self.nonphoto_fraction),
            ("media_fraction", self.media_fraction),
            ("event_media_fraction", self.event_media_fraction),
            ("background_geo_fraction", self.background_geo_fraction),
            ("native_geo_fraction", self.native_geo_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        let mut ids = std::collections::HashSet::new();
        for e in &self.events {
            if !ids.insert(&e.event_id) {
                return bad(format!("duplicate event_id {:?}", e.event_id));
            }
            if e.start >= e.end {
                return bad(format!("event {:?}: start must precede end", e.event_id));
            }
            if !(0.0..=1.0).contains(&e.geo_fraction) {
                return bad(format!("event {:?}: geo_fraction must lie in [0, 1]", e.event_id));
            }
            if e.sigma_km.is_nan() || e.sigma_km < 0.0 || e.rate_multiplier.is_nan() || e.rate_multiplier < 0.0 {
                return bad(format!("event {:?}: sigma_km and rate_multiplier must be non-negative", e.event_id));
            }
            if !e.center.in_bounds() {
                return bad(format!("event {:?}: center out of range", e.event_id));
            }
            if e.boost.values().any(|b| b.is_nan() || *b < 0.0) {
                return bad(format!("event {:?}: boosts must be non-negative", e.event_id));
            }
        }
        for r in &self.regions {
            if r.population == 0 {
                return bad(format!("region {:?}: population must be positive", r.region_id));
            }
            if r.region_id == UNASSIGNED {
                return bad(format!("region id {UNASSIGNED:?} is reserved"));
            }
            let [a, b, c, d] = r.bbox;
            if !(a < c && b < d) {
                return bad(format!("region {:?}: empty bbox", r.region_id));
            }
        }
        Ok(())
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.start + Duration::hours(self.duration_hours as i64)
    }
}

#[derive(Debug, Clone)]
pub struct SynthImage {
    pub path: String,
    pub image: LuminanceImage,
    pub kind: ImageKind,
    /// Post id of the image this one near-duplicates.
    pub duplicate_of: Option<String>,
}

/// A generated corpus held in memory.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub posts: Vec<Post>,
    pub images: Vec<SynthImage>,
    pub events: Vec<EventRecord>,
    pub sample: LabeledSample,
    pub gazetteer: Vec<GazetteerEntry>,
    pub regions: Vec<Region>,
    /// Located event posts per region (by the location written into each
    /// post), the synthetic stand-in for reported impact.
    pub impact: ImpactReference,
    /// Posts that received at least one boosted term.
    pub event_posts: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SynthSummary {
    pub posts: usize,
    pub images: usize,
    pub near_duplicates: usize,
    pub non_photos: usize,
    pub event_posts: usize,
    pub relevant: usize,
}

impl SynthCorpus {
    pub fn summary(&self) -> SynthSummary {
        SynthSummary {
            posts: self.posts.len(),
            images: self.images.len(),
            near_duplicates: self.images.iter().filter(|i| i.duplicate_of.is_some()).count(),
            non_photos: self.images.iter().filter(|i| i.kind == ImageKind::NonPhoto).count(),
            event_posts: self.event_posts,
            relevant: self.sample.labels.values().filter(|&&v| v).count(),
        }
    }

    /// Writes the corpus layout under `dir` (created if missing).
    pub fn write(&self, dir: &Path) -> Result<(), SynthError> {
        fs::create_dir_all(dir.join(layout::MEDIA_DIR))?;
        let mut w = BufWriter::new(fs::File::create(dir.join(layout::POSTS))?);
        ingest::write_posts(&mut w, &self.posts)?;
        w.flush()?;
        for img in &self.images {
            fs::write(dir.join(layout::MEDIA_DIR).join(&img.path), img.image.encode_pgm())?;
        }
        ingest::write_events(fs::File::create(dir.join(layout::EVENTS))?, &self.events)?;
        ingest::write_sample(fs::File::create(dir.join(layout::SAMPLE))?, &self.sample)?;
        ingest::write_gazetteer(fs::File::create(dir.join(layout::GAZETTEER))?, &self.gazetteer)?;
        if !self.regions.is_empty() {
            ingest::write_regions(fs::File::create(dir.join(layout::REGIONS))?, &self.regions)?;
            ingest::write_impact(fs::File::create(dir.join(layout::IMPACT))?, &self.impact)?;
        }
        Ok(())
    }
}

pub fn generate_to(spec: &SynthSpec, dir: &Path) -> Result<SynthSummary, SynthError> {
    let corpus = generate(spec)?;
    corpus.write(dir)?;
    Ok(corpus.summary())
}

struct Draft {
    at: DateTime<Utc>,
    lang: String,
    text: String,
    native_geo: Option<GeoPoint>,
    image: Option<ImageKind>,
    /// Region id of the written location, for the impact table.
    event_region: Option<String>,
    relevant: bool,
    event_related: bool,
}

fn poisson_like(rng: &mut XorShift64Star, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    (mean + mean.sqrt() * rng.normal()).round().max(0.0) as usize
}

/// Offsets a point by a 2-D normal with `sigma_km` per axis.
fn scatter(rng: &mut XorShift64Star, c: GeoPoint, sigma_km: f64) -> GeoPoint {
    let dn = rng.normal() * sigma_km;
    let de = rng.normal() * sigma_km;
    let lat = (c.lat + (dn / EARTH_RADIUS_KM).to_degrees()).clamp(-90.0, 90.0);
    let coslat = c.lat.to_radians().cos().max(1e-6);
    let mut lon = c.lon + (de / (EARTH_RADIUS_KM * coslat)).to_degrees();
    if lon > 180.0 {
        lon -= 360.0;
    } else if lon < -180.0 {
        lon += 360.0;
    }
    GeoPoint::new(lat, lon)
}

fn nearest_place<'a>(places: &'a [GazetteerEntry], country: &str, p: GeoPoint) -> Option<&'a GazetteerEntry> {
    places
        .iter()
        .filter(|e| e.country == country && e.admin_level >= 6)
        .min_by(|a, b| haversine(a.point(), p).total_cmp(&haversine(b.point(), p)))
}

fn region_of(regions: &[Region], p: GeoPoint) -> String {
    regions
        .iter()
        .find(|r| r.polygon.contains(p.lon, p.lat))
        .map_or_else(|| UNASSIGNED.to_string(), |r| r.region_id.clone())
}

pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let mut rng = XorShift64Star::new(spec.seed);

    let mut countries: Vec<String> = spec.events.iter().map(|e| e.country.clone()).collect();
    countries.sort();
    countries.dedup();
    // without events there is no country focus; ship the whole bundle
    let gazetteer = if countries.is_empty() {
        places::all()
    } else {
        places::subset(&countries)
    };
    let regions: Vec<Region> = spec
        .regions
        .iter()
        .map(|r| Region {
            region_id: r.region_id.clone(),
            name: r.name.clone(),
            polygon: Polygon::rect(r.bbox[0], r.bbox[1], r.bbox[2], r.bbox[3]),
            population: r.population,
        })
        .collect();
    let weights: Vec<f64> = spec.languages.iter().map(|l| l.weight).collect();

    let mut drafts = Vec::new();
    for h in 0..spec.duration_hours as i64 {
        let hour = spec.start + Duration::hours(h);
        let mut mult = 1.0;
        for e in &spec.events {
            if e.active_during(hour, hour + Duration::hours(1)) {
                mult *= e.rate_multiplier;
            }
        }
        let n = poisson_like(&mut rng, spec.base_rate * mult);
        for _ in 0..n {
            let at = hour + Duration::seconds(rng.below(3600) as i64);
            let lang = &spec.languages[rng.weighted(&weights)].code;
            drafts.push(draft_post(&mut rng, spec, &gazetteer, &regions, at, lang));
        }
    }
    // Order by time; ties keep generation order (stable sort).
    drafts.sort_by_key(|d| d.at);
    let event_posts = drafts.iter().filter(|d| d.event_related).count();

    let width = drafts.len().max(1).to_string().len().max(6);
    let mut posts = Vec::with_capacity(drafts.len());
    let mut images: Vec<SynthImage> = Vec::new();
    let mut labels = BTreeMap::new();
    let mut impact: BTreeMap<String, f64> = regions.iter().map(|r| (r.region_id.clone(), 0.0)).collect();
    for (i, d) in drafts.into_iter().enumerate() {
        let id = format!("p{:0width$}", i + 1);
        let mut media = Vec::new();
        if let Some(kind) = d.image {
            let path = format!("{id}_0.pgm");
            let img = if !images.is_empty() && rng.chance(spec.duplicate_fraction) {
                let src = &images[rng.below(images.len())];
                let src_post = src.path.trim_end_matches("_0.pgm").to_string();
                SynthImage {
                    path: path.clone(),
                    image: images::near_duplicate(&mut rng, &src.image, src.kind),
                    kind: src.kind,
                    duplicate_of: Some(src.duplicate_of.clone().unwrap_or(src_post)),
                }
            } else {
                let image = match kind {
                    ImageKind::Photo => images::photo(&mut rng),
                    ImageKind::NonPhoto => images::non_photo(&mut rng),
                };
                SynthImage {
                    path: path.clone(),
                    image,
                    kind,
                    duplicate_of: None,
                }
            };
            images.push(img);
            media.push(MediaRef {
                media_id: format!("{id}-m0"),
                path,
            });
        }
        if let Some(r) = &d.event_region {
            if let Some(v) = impact.get_mut(r) {
                *v += 1.0;
            }
        }
        labels.insert(id.clone(), d.relevant);
        posts.push(Post {
            id,
            created_at: d.at,
            lang: d.lang,
            text: d.text,
            media,
            native_geo: d.native_geo,
            is_repost: false,
        });
    }

    let events = spec
        .events
        .iter()
        .map(|e| EventRecord {
            event_id: e.event_id.clone(),
            event_type: e.event_type.clone(),
            country: e.country.clone(),
            start: e.start,
            end: e.end,
            name: if e.name.is_empty() { e.event_id.clone() } else { e.name.clone() },
        })
        .collect();

    Ok(SynthCorpus {
        posts,
        images,
        events,
        sample: LabeledSample {
            sample_id: "sample".into(),
            labels,
        },
        gazetteer,
        regions,
        impact: ImpactReference { affected: impact },
        event_posts,
    })
}

impl EventSpec {
    fn active_during(&self, a: DateTime<Utc>, b: DateTime<Utc>) -> bool {
        self.start < b && self.end > a
    }

    fn active_at(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }
}

fn draft_post(
    rng: &mut XorShift64Star,
    spec: &SynthSpec,
    gazetteer: &[GazetteerEntry],
    regions: &[Region],
    at: DateTime<Utc>,
    lang: &str,
) -> Draft {
    let vocab = words::for_language(lang);
    let active: Vec<&EventSpec> = spec.events.iter().filter(|e| e.active_at(at)).collect();
    let mut boosted: HashMap<&str, f64> = HashMap::new();
    for e in &active {
        for (t, b) in &e.boost {
            let f = boosted.entry(t.as_str()).or_insert(1.0);
            *f = f.max(*b);
        }
    }

    let n = rng.range(MIN_WORDS, MAX_WORDS);
    let mut tokens: Vec<&str> = Vec::with_capacity(n + 4);
    for _ in 0..n {
        // Boosted terms inside a window are governed by the boost draw
        // below, so background draws of them are redrawn.
        let mut w = vocab[rng.below(vocab.len())];
        let mut tries = 0;
        while boosted.contains_key(w) && tries < 16 {
            w = vocab[rng.below(vocab.len())];
            tries += 1;
        }
        tokens.push(w);
    }

    let mut event: Option<&EventSpec> = None;
    for e in &active {
        for t in e.boost.keys() {
            if tokens.contains(&t.as_str()) {
                continue;
            }
            let base = if vocab.contains(&t.as_str()) {
                1.0 - (1.0 - 1.0 / vocab.len() as f64).powi(n as i32)
            } else {
                FOREIGN_TERM_BASE
            };
            if rng.chance((base * boosted[t.as_str()]).min(1.0)) {
                let pos = rng.below(tokens.len() + 1);
                tokens.insert(pos, t.as_str());
                event.get_or_insert(e);
            }
        }
    }

    let mut native_geo = None;
    let mut event_region = None;
    let mut place: Option<String> = None;
    let (located, center) = match event {
        Some(e) => (rng.chance(e.geo_fraction), Some(e)),
        None => (rng.chance(spec.background_geo_fraction), None),
    };
    if located {
        let native = rng.chance(spec.native_geo_fraction);
        match center {
            Some(e) => {
                let p = scatter(rng, e.center, e.sigma_km);
                match (native, nearest_place(gazetteer, &e.country, p)) {
                    (false, Some(entry)) => {
                        place = Some(pick_name(rng, entry));
                        event_region = Some(region_of(regions, entry.point()));
                        if rng.chance(0.3) {
                            if let Some(c) = gazetteer.iter().find(|g| g.country == e.country && g.admin_level == 2) {
                                place = Some(format!("{} {}", place.unwrap(), c.canonical_name));
                            }
                        }
                    }
                    _ => {
                        native_geo = Some(p);
                        event_region = Some(region_of(regions, p));
                    }
                }
            }
            None if !gazetteer.is_empty() => {
                let entry = &gazetteer[rng.below(gazetteer.len())];
                if native {
                    native_geo = Some(entry.point());
                } else {
                    place = Some(pick_name(rng, entry));
                }
            }
            None => {}
        }
    }

    let mut text = tokens.join(" ");
    if let Some(p) = place {
        if !p.contains(' ') && rng.chance(0.2) {
            text = format!("{text} #{p}");
        } else {
            text = format!("{text} {p}");
        }
    }

    let media_p = if event.is_some() { spec.event_media_fraction } else { spec.media_fraction };
    let image = rng.chance(media_p).then(|| {
        if rng.chance(spec.nonphoto_fraction) {
            ImageKind::NonPhoto
        } else {
            ImageKind::Photo
        }
    });
    let relevant = active
        .iter()
        .any(|e| e.boost.keys().any(|t| tokens.contains(&t.as_str())));

    Draft {
        at,
        lang: lang.to_string(),
        text,
        native_geo,
        image,
        event_region,
        relevant,
        event_related: event.is_some(),
    }
}

fn pick_name(rng: &mut XorShift64Star, e: &GazetteerEntry) -> String {
    let n = 1 + e.alt_names.len();
    let i = rng.below(n);
    if i == 0 {
        e.canonical_name.clone()
    } else {
        e.alt_names[i - 1].clone()
    }
}
