//! Minimal WKT `POLYGON` support: parsing, formatting and point containment.
//!
//! Coordinates follow WKT axis order, `x y` = `lon lat`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WktError {
    #[error("expected POLYGON, found {0:?}")]
    NotPolygon(String),
    #[error("malformed WKT: {0}")]
    Malformed(String),
    #[error("ring not closed")]
    RingNotClosed,
    #[error("ring has fewer than 4 points")]
    RingTooShort,
}

/// A polygon with an exterior ring and optional holes. Rings are stored
/// closed (first point equals last point) as `(lon, lat)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub exterior: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<Vec<(f64, f64)>>,
}

impl Polygon {
    pub fn new(exterior: Vec<(f64, f64)>) -> Result<Self, WktError> {
        check_ring(&exterior)?;
        Ok(Polygon {
            exterior,
            holes: Vec::new(),
        })
    }

    /// Axis-aligned rectangle `[min_lon, max_lon] x [min_lat, max_lat]`.
    pub fn rect(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Self {
        Polygon {
            exterior: vec![
                (min_lon, min_lat),
                (max_lon, min_lat),
                (max_lon, max_lat),
                (min_lon, max_lat),
                (min_lon, min_lat),
            ],
            holes: Vec::new(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, WktError> {
        let s = s.trim();
        let upper = s.to_ascii_uppercase();
        let Some(rest) = upper.strip_prefix("POLYGON") else {
            let head: String = s.chars().take(16).collect();
            return Err(WktError::NotPolygon(head));
        };
        // Work on the original string from the same offset so numbers keep
        // their exact text.
        let body = s[s.len() - rest.len()..].trim();
        let inner = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| WktError::Malformed("unbalanced outer parentheses".into()))?;

        let mut rings = Vec::new();
        let mut rest = inner.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| WktError::Malformed("expected '(' before ring".into()))?;
            let close = open
                .find(')')
                .ok_or_else(|| WktError::Malformed("unterminated ring".into()))?;
            rings.push(parse_ring(&open[..close])?);
            rest = open[close + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
                if rest.is_empty() {
                    return Err(WktError::Malformed("trailing comma".into()));
                }
            } else if !rest.is_empty() {
                return Err(WktError::Malformed(format!("unexpected text {rest:?}")));
            }
        }
        let mut rings = rings.into_iter();
        let exterior = rings
            .next()
            .ok_or_else(|| WktError::Malformed("polygon has no rings".into()))?;
        check_ring(&exterior)?;
        let holes: Vec<_> = rings.collect();
        for h in &holes {
            check_ring(h)?;
        }
        Ok(Polygon { exterior, holes })
    }

    /// Containment by ray casting; points on any ring edge count as inside.
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        if on_boundary(&self.exterior, lon, lat) {
            return true;
        }
        if !ray_cast(&self.exterior, lon, lat) {
            return false;
        }
        for h in &self.holes {
            if on_boundary(h, lon, lat) {
                return true;
            }
            if ray_cast(h, lon, lat) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Polygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "POLYGON (")?;
        for (i, ring) in std::iter::once(&self.exterior)
            .chain(self.holes.iter())
            .enumerate()
        {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (j, (x, y)) in ring.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x} {y}")?;
            }
            write!(f, ")")?;
        }
        write!(f, ")")
    }
}

fn parse_ring(s: &str) -> Result<Vec<(f64, f64)>, WktError> {
    s.split(',')
        .map(|pair| {
            let mut it = pair.split_whitespace();
            let x = it.next().and_then(|v| v.parse::<f64>().ok());
            let y = it.next().and_then(|v| v.parse::<f64>().ok());
            match (x, y, it.next()) {
                (Some(x), Some(y), None) if x.is_finite() && y.is_finite() => Ok((x, y)),
                _ => Err(WktError::Malformed(format!("bad coordinate {:?}", pair.trim()))),
            }
        })
        .collect()
}

fn check_ring(ring: &[(f64, f64)]) -> Result<(), WktError> {
    if ring.first() != ring.last() {
        return Err(WktError::RingNotClosed);
    }
    if ring.len() < 4 {
        return Err(WktError::RingTooShort);
    }
    Ok(())
}

fn on_boundary(ring: &[(f64, f64)], x: f64, y: f64) -> bool {
    ring.windows(2).any(|w| {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        let cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1);
        let scale = (x2 - x1).abs().max((y2 - y1).abs()).max(1.0);
        cross.abs() <= 1e-12 * scale
            && x >= x1.min(x2) - 1e-12
            && x <= x1.max(x2) + 1e-12
            && y >= y1.min(y2) - 1e-12
            && y <= y1.max(y2) + 1e-12
    })
}

fn ray_cast(ring: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (xi, yi) = w[0];
        let (xj, yj) = w[1];
        if (yi > y) != (yj > y) {
            let x_cross = xi + (y - yi) * (xj - xi) / (yj - yi);
            if x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}
