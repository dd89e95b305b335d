use serde::Serialize;

use super::{haversine, GeoResolution, EARTH_RADIUS_KM};
use crate::model::{GeoPoint, Region};
use crate::wkt::Polygon;

/// Ray-casting containment; boundary points count as inside.
pub fn point_in_polygon(p: GeoPoint, polygon: &Polygon) -> bool {
    polygon.contains(p.lon, p.lat)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryFilterOutcome {
    /// Aligned with the input resolutions.
    pub keep: Vec<bool>,
    pub warnings: Vec<String>,
}

/// Keeps a resolution iff any of its places lies inside a monitored region.
pub fn geometry_filter(resolutions: &[GeoResolution], monitored: &[Region]) -> GeometryFilterOutcome {
    let mut warnings = Vec::new();
    if monitored.is_empty() {
        warnings.push("geometry filter has no monitored regions; every item is dropped".to_string());
        log::warn!("{}", warnings[0]);
    }
    let keep = resolutions
        .iter()
        .map(|r| {
            r.places.iter().any(|p| {
                monitored
                    .iter()
                    .any(|reg| point_in_polygon(p.point(), &reg.polygon))
            })
        })
        .collect();
    GeometryFilterOutcome { keep, warnings }
}

/// Keeps a point iff at least `min_pts` points (itself included) lie within
/// `eps_km` of it. Returns a mask aligned with `points`.
pub fn density_filter(points: &[GeoPoint], eps_km: f64, min_pts: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].lat.total_cmp(&points[b].lat));
    // great-circle distance is at least R * |dlat|
    let lat_window = (eps_km / EARTH_RADIUS_KM).to_degrees();
    let mut keep = vec![false; points.len()];
    for (pos, &i) in order.iter().enumerate() {
        let p = points[i];
        let mut count = 1;
        for &j in order[..pos].iter().rev() {
            if p.lat - points[j].lat > lat_window {
                break;
            }
            if haversine(p, points[j]) <= eps_km {
                count += 1;
            }
        }
        for &j in &order[pos + 1..] {
            if points[j].lat - p.lat > lat_window {
                break;
            }
            if haversine(p, points[j]) <= eps_km {
                count += 1;
            }
        }
        keep[i] = count >= min_pts;
    }
    keep
}
