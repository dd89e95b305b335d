//! Spatio-temporal aggregation of geolocated output and comparison with
//! reference impact figures.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use chrono::{DateTime, DurationRound, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::geo::GeoResolution;
use crate::model::Region;
use crate::stats::{average_ranks, pearson};

pub const UNASSIGNED: &str = "unassigned";
/// Rates are per this many inhabitants.
pub const RATE_BASE: f64 = 100_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BucketWidth {
    Hour,
    Day,
}

impl BucketWidth {
    pub fn floor(self, t: DateTime<Utc>) -> DateTime<Utc> {
        let d = match self {
            BucketWidth::Hour => TimeDelta::hours(1),
            BucketWidth::Day => TimeDelta::days(1),
        };
        t.duration_trunc(d).expect("in range")
    }
}

impl FromStr for BucketWidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hour" => Ok(BucketWidth::Hour),
            "day" => Ok(BucketWidth::Day),
            _ => Err(format!("unknown bucket {s:?}: expected \"hour\" or \"day\"")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAggregate {
    pub region_id: String,
    #[serde(with = "crate::model::utc_seconds")]
    pub bucket: DateTime<Utc>,
    pub count: u64,
    /// Absent for the unassigned bucket and for zero-population regions.
    pub rate_per_100k: Option<f64>,
}

pub fn rate_per_100k(count: u64, population: u64) -> Option<f64> {
    (population > 0).then(|| count as f64 / population as f64 * RATE_BASE)
}

/// Index of the first region containing the point, in input order.
pub fn assign(resolution: &GeoResolution, regions: &[Region]) -> Option<usize> {
    let p = resolution.primary().point();
    regions.iter().position(|r| r.polygon.contains(p.lon, p.lat))
}

/// Counts resolutions per `(region, bucket)`, using each resolution's
/// primary place. Rows are sorted by region order (unassigned last), then
/// bucket; empty cells are omitted.
pub fn aggregate(resolutions: &[GeoResolution], regions: &[Region], width: BucketWidth) -> Vec<RegionAggregate> {
    let mut cells: BTreeMap<(usize, DateTime<Utc>), u64> = BTreeMap::new();
    for r in resolutions {
        let idx = assign(r, regions).unwrap_or(regions.len());
        *cells.entry((idx, width.floor(r.created_at))).or_default() += 1;
    }
    cells
        .into_iter()
        .map(|((idx, bucket), count)| match regions.get(idx) {
            Some(reg) => RegionAggregate {
                region_id: reg.region_id.clone(),
                bucket,
                count,
                rate_per_100k: rate_per_100k(count, reg.population),
            },
            None => RegionAggregate {
                region_id: UNASSIGNED.into(),
                bucket,
                count,
                rate_per_100k: None,
            },
        })
        .collect()
}

/// Total count per region id, including `unassigned` when non-zero.
pub fn totals(rows: &[RegionAggregate]) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for r in rows {
        *out.entry(r.region_id.clone()).or_default() += r.count;
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum SpearmanError {
    #[error("need at least 2 regions present on both sides, got {0}")]
    TooFew(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    pub n: usize,
    /// Regions present on only one side.
    pub excluded: Vec<String>,
}

/// Spearman's rank correlation over the regions both maps share.
pub fn spearman(x: &BTreeMap<String, f64>, y: &BTreeMap<String, f64>) -> Result<Spearman, SpearmanError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (k, v) in x {
        match y.get(k) {
            Some(w) => {
                xs.push(*v);
                ys.push(*w);
            }
            None => excluded.push(k.clone()),
        }
    }
    excluded.extend(y.keys().filter(|k| !x.contains_key(*k)).cloned());
    excluded.sort();
    if xs.len() < 2 {
        return Err(SpearmanError::TooFew(xs.len()));
    }
    let rho = pearson(&average_ranks(&xs), &average_ranks(&ys)).expect("equal lengths ≥ 2");
    Ok(Spearman {
        rho,
        n: xs.len(),
        excluded,
    })
}

fn ring(points: &[(f64, f64)]) -> Value {
    let mut coords: Vec<[f64; 2]> = points.iter().map(|&(lon, lat)| [lon, lat]).collect();
    if coords.first() != coords.last() {
        coords.push(coords[0]);
    }
    json!(coords)
}

/// One feature per region (in input order), with totals and per-bucket
/// rows. Regions without rows get zero counts.
pub fn export_choropleth(rows: &[RegionAggregate], regions: &[Region]) -> Value {
    let features: Vec<Value> = regions
        .iter()
        .map(|reg| {
            let mine: Vec<&RegionAggregate> = rows.iter().filter(|r| r.region_id == reg.region_id).collect();
            let count: u64 = mine.iter().map(|r| r.count).sum();
            let mut rings = vec![ring(&reg.polygon.exterior)];
            rings.extend(reg.polygon.holes.iter().map(|h| ring(h)));
            json!({
                "type": "Feature",
                "id": reg.region_id,
                "geometry": {"type": "Polygon", "coordinates": rings},
                "properties": {
                    "region_id": reg.region_id,
                    "name": reg.name,
                    "population": reg.population,
                    "count": count,
                    "rate_per_100k": rate_per_100k(count, reg.population),
                    "buckets": mine.iter().map(|r| json!({
                        "bucket": crate::model::format_utc(&r.bucket),
                        "count": r.count,
                        "rate_per_100k": r.rate_per_100k,
                    })).collect::<Vec<_>>(),
                }
            })
        })
        .collect();
    let unassigned: u64 = rows.iter().filter(|r| r.region_id == UNASSIGNED).map(|r| r.count).sum();
    json!({
        "type": "FeatureCollection",
        "features": features,
        "metadata": {
            "normalization": "per_100k",
            "rate_base": RATE_BASE,
            "unassigned": unassigned,
        }
    })
}

pub fn write_csv<W: Write>(w: W, rows: &[RegionAggregate]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["region_id", "bucket", "count", "rate_per_100k"])?;
    for r in rows {
        out.write_record([
            r.region_id.clone(),
            crate::model::format_utc(&r.bucket),
            r.count.to_string(),
            r.rate_per_100k.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{Method, Provenance, ResolvedPlace};
    use crate::wkt::Polygon;
    use chrono::TimeZone;

    fn res(id: &str, hour: u32, lon: f64, lat: f64) -> GeoResolution {
        GeoResolution {
            post_id: id.into(),
            created_at: Utc.with_ymd_and_hms(2021, 6, 1, hour, 15, 0).unwrap(),
            places: vec![ResolvedPlace {
                entry_id: None,
                lat,
                lon,
                provenance: Provenance::Native,
                admin_level: None,
                surface: None,
            }],
            objective: 0.0,
            method: Method::Native,
        }
    }

    fn region(id: &str, pop: u64, bbox: [f64; 4]) -> Region {
        Region {
            region_id: id.into(),
            name: id.into(),
            polygon: Polygon::rect(bbox[0], bbox[1], bbox[2], bbox[3]),
            population: pop,
        }
    }

    #[test]
    fn five_posts_one_day() {
        let regions = [region("R", 1000, [0.0, 0.0, 1.0, 1.0])];
        let rs: Vec<_> = (0..5).map(|i| res(&format!("p{i}"), i, 0.5, 0.5)).collect();
        let rows = aggregate(&rs, &regions, BucketWidth::Day);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].count, 5);
        assert_eq!(rows[0].rate_per_100k, Some(500.0));
        assert_eq!(aggregate(&rs, &regions, BucketWidth::Hour).len(), 5);
    }

    #[test]
    fn outside_goes_unassigned_and_overlap_takes_first() {
        let regions = [region("A", 10, [0.0, 0.0, 2.0, 2.0]), region("B", 10, [1.0, 1.0, 3.0, 3.0])];
        let rs = [res("a", 0, 1.5, 1.5), res("b", 0, 2.5, 2.5), res("c", 0, 9.0, 9.0)];
        let t = totals(&aggregate(&rs, &regions, BucketWidth::Day));
        assert_eq!(t["A"], 1);
        assert_eq!(t["B"], 1);
        assert_eq!(t[UNASSIGNED], 1);
    }

    #[test]
    fn spearman_reports_exclusions() {
        let x: BTreeMap<String, f64> = [("a", 1.0), ("b", 2.0), ("c", 3.0), ("z", 0.0)]
            .map(|(k, v)| (k.to_string(), v))
            .into();
        let y: BTreeMap<String, f64> = [("a", 30.0), ("b", 20.0), ("c", 10.0), ("q", 0.0)]
            .map(|(k, v)| (k.to_string(), v))
            .into();
        let s = spearman(&x, &y).unwrap();
        assert_eq!(s.rho, -1.0);
        assert_eq!(s.n, 3);
        assert_eq!(s.excluded, ["q", "z"]);
    }

    #[test]
    fn empty_choropleth_has_zero_features() {
        let regions = [region("A", 10, [0.0, 0.0, 1.0, 1.0]), region("B", 0, [1.0, 1.0, 2.0, 2.0])];
        let g = export_choropleth(&[], &regions);
        let f = g["features"].as_array().unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0]["properties"]["count"], 0);
        assert_eq!(f[0]["properties"]["rate_per_100k"], 0.0);
        assert!(f[1]["properties"]["rate_per_100k"].is_null());
    }
}
