//! Toponym extraction, disambiguation against a gazetteer, and geometry and
//! density post-filters.

mod disambiguate;
mod filters;
mod mentions;

pub use disambiguate::{
    disambiguate, objective, resolve_post, Disambiguation, GeoResolution, Method, Provenance,
    ResolvedPlace, Weights, BEAM_WIDTH, EXHAUSTIVE_LIMIT,
};
pub use filters::{density_filter, geometry_filter, point_in_polygon, GeometryFilterOutcome};
pub use mentions::{extract_mentions, Mention};

use thiserror::Error;

use crate::model::GeoPoint;

/// Earth radius in km. Quarter meridian = 10007.543 km, antipode =
/// 20015.087 km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Half the great-circle circumference, the largest possible distance.
pub const MAX_DISTANCE_KM: f64 = 20015.09;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeoError {
    #[error("mention {0:?} has no candidates")]
    NoCandidates(String),
    #[error("no mentions to disambiguate")]
    NoMentions,
}

/// Great-circle distance in km.
pub fn haversine(a: GeoPoint, b: GeoPoint) -> f64 {
    let (la1, la2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = la2 - la1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la1.cos() * la2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}
