//! Domain types shared by every stage.

use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::wkt::Polygon;

/// Serialization format for all timestamps: second precision, `Z` suffix.
pub const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// Parses an ISO-8601 timestamp into UTC, truncating sub-second precision.
/// Offsets are converted; naive timestamps are taken as UTC.
pub fn parse_utc(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc).trunc_subsecs(0));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc().trunc_subsecs(0));
        }
    }
    None
}

pub fn format_utc(t: &DateTime<Utc>) -> String {
    t.format(TIME_FORMAT).to_string()
}

pub(crate) mod utc_seconds {
    use chrono::{DateTime, Utc};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_utc(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_utc(&raw).ok_or_else(|| D::Error::custom(format!("bad timestamp {raw:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }

    pub fn in_bounds(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaRef {
    pub media_id: String,
    /// Relative to the corpus media directory.
    pub path: String,
}

/// One social-media item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    #[serde(with = "utc_seconds")]
    pub created_at: DateTime<Utc>,
    pub lang: String,
    pub text: String,
    #[serde(default)]
    pub media: Vec<MediaRef>,
    #[serde(default)]
    pub native_geo: Option<GeoPoint>,
    #[serde(default)]
    pub is_repost: bool,
}

/// A named place. `admin_level` follows OSM: 1 is the largest area, 10 the
/// most specific.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub entry_id: String,
    pub canonical_name: String,
    pub alt_names: Vec<String>,
    pub lat: f64,
    pub lon: f64,
    pub admin_level: u8,
    pub population: u64,
    pub country: String,
    pub polygon: Option<Polygon>,
}

impl GazetteerEntry {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_id: String,
    pub event_type: String,
    pub country: String,
    #[serde(with = "utc_seconds")]
    pub start: DateTime<Utc>,
    #[serde(with = "utc_seconds")]
    pub end: DateTime<Utc>,
    pub name: String,
}

impl EventRecord {
    /// Whether the event overlaps the half-open interval `[from, to)`.
    pub fn active_during(&self, from: DateTime<Utc>, to: DateTime<Utc>) -> bool {
        self.start < to && self.end > from
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub sample_id: String,
    pub labels: BTreeMap<String, bool>,
}

impl LabeledSample {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, post_id: &str) -> Option<bool> {
        self.labels.get(post_id).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub region_id: String,
    pub name: String,
    pub polygon: Polygon,
    pub population: u64,
}

/// Reference impact (e.g. affected persons) per region.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImpactReference {
    pub affected: BTreeMap<String, f64>,
}
