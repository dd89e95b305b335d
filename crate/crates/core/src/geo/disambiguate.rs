//! Candidate disambiguation.
//!
//! An assignment picks one candidate per mention and is scored by
//!
//! ```text
//! J = alpha * mean over mention pairs of haversine / MAX_DISTANCE_KM
//!   + beta  * mean over mentions of (10 - admin_level) / 9
//! ```
//!
//! Lower is better: nearby candidates and specific places win. With a single
//! mention the distance term is zero. Ties (|dJ| <= 1e-12) go to the larger
//! total population, then the lexicographically smaller sorted entry ids,
//! then the smaller per-mention entry id sequence.

use std::cmp::Ordering;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::mentions::{extract_mentions, Mention};
use super::{haversine, GeoError, MAX_DISTANCE_KM};
use crate::ingest::Gazetteer;
use crate::model::{GazetteerEntry, GeoPoint, Post};

/// Largest candidate-assignment product searched exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000;
pub const BEAM_WIDTH: usize = 32;
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            alpha: 1.0,
            beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Beam,
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Gazetteer,
    Native,
}

fn admin_penalty(e: &GazetteerEntry) -> f64 {
    (10.0 - e.admin_level as f64) / 9.0
}

/// Objective of a full or partial assignment.
pub fn objective(chosen: &[&GazetteerEntry], w: &Weights) -> f64 {
    let m = chosen.len();
    if m == 0 {
        return 0.0;
    }
    let mut dist = 0.0;
    if m > 1 {
        let mut sum = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                sum += haversine(chosen[i].point(), chosen[j].point()) / MAX_DISTANCE_KM;
            }
        }
        dist = sum / (m * (m - 1) / 2) as f64;
    }
    let pen = chosen.iter().map(|e| admin_penalty(e)).sum::<f64>() / m as f64;
    w.alpha * dist + w.beta * pen
}

struct Scored<'g> {
    chosen: Vec<&'g GazetteerEntry>,
    j: f64,
    pop: u64,
    sorted_ids: Vec<&'g str>,
}

impl<'g> Scored<'g> {
    fn new(chosen: Vec<&'g GazetteerEntry>, w: &Weights) -> Self {
        let j = objective(&chosen, w);
        let pop = chosen.iter().map(|e| e.population).sum();
        let mut sorted_ids: Vec<&str> = chosen.iter().map(|e| e.entry_id.as_str()).collect();
        sorted_ids.sort_unstable();
        Scored {
            chosen,
            j,
            pop,
            sorted_ids,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        if (self.j - other.j).abs() > TIE_EPS {
            return self.j.total_cmp(&other.j);
        }
        other
            .pop
            .cmp(&self.pop)
            .then_with(|| self.sorted_ids.cmp(&other.sorted_ids))
            .then_with(|| {
                let a = self.chosen.iter().map(|e| e.entry_id.as_str());
                let b = other.chosen.iter().map(|e| e.entry_id.as_str());
                a.cmp(b)
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disambiguation<'g> {
    /// One entry per mention, in mention order.
    pub chosen: Vec<&'g GazetteerEntry>,
    pub objective: f64,
    pub method: Method,
}

pub fn disambiguate<'g>(mentions: &[Mention<'g>], w: &Weights) -> Result<Disambiguation<'g>, GeoError> {
    if mentions.is_empty() {
        return Err(GeoError::NoMentions);
    }
    if let Some(m) = mentions.iter().find(|m| m.candidates.is_empty()) {
        return Err(GeoError::NoCandidates(m.surface.clone()));
    }
    let product = mentions
        .iter()
        .try_fold(1u64, |acc, m| acc.checked_mul(m.candidates.len() as u64))
        .unwrap_or(u64::MAX);
    let (best, method) = if product <= EXHAUSTIVE_LIMIT {
        (exhaustive(mentions, w), Method::Exhaustive)
    } else {
        (beam(mentions, w), Method::Beam)
    };
    Ok(Disambiguation {
        objective: best.j,
        chosen: best.chosen,
        method,
    })
}

fn exhaustive<'g>(mentions: &[Mention<'g>], w: &Weights) -> Scored<'g> {
    let mut idx = vec![0usize; mentions.len()];
    let mut best: Option<Scored<'g>> = None;
    loop {
        let chosen: Vec<_> = idx
            .iter()
            .zip(mentions)
            .map(|(&i, m)| m.candidates[i])
            .collect();
        let s = Scored::new(chosen, w);
        if best.as_ref().is_none_or(|b| s.cmp(b) == Ordering::Less) {
            best = Some(s);
        }
        // mixed-radix increment, last mention fastest
        let mut k = mentions.len();
        loop {
            if k == 0 {
                return best.expect("at least one assignment");
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < mentions[k].candidates.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn beam<'g>(mentions: &[Mention<'g>], w: &Weights) -> Scored<'g> {
    let mut frontier: Vec<Scored<'g>> = vec![Scored::new(Vec::new(), w)];
    for m in mentions {
        let mut next: Vec<Scored<'g>> = Vec::with_capacity(frontier.len() * m.candidates.len());
        for partial in &frontier {
            for &c in &m.candidates {
                let mut chosen = partial.chosen.clone();
                chosen.push(c);
                next.push(Scored::new(chosen, w));
            }
        }
        next.sort_by(|a, b| a.cmp(b));
        next.truncate(BEAM_WIDTH);
        frontier = next;
    }
    frontier.into_iter().next().expect("non-empty beam")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPlace {
    /// `null` for native geotags.
    #[serde(default)]
    pub entry_id: Option<String>,
    pub lat: f64,
    pub lon: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admin_level: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
}

impl ResolvedPlace {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoResolution {
    pub post_id: String,
    #[serde(with = "crate::model::utc_seconds")]
    pub created_at: DateTime<Utc>,
    pub places: Vec<ResolvedPlace>,
    pub objective: f64,
    pub method: Method,
}

impl GeoResolution {
    /// The most specific place (highest admin level; native geotags rank
    /// above everything), first on ties.
    pub fn primary(&self) -> &ResolvedPlace {
        let rank = |p: &ResolvedPlace| match p.provenance {
            Provenance::Native => 11,
            Provenance::Gazetteer => p.admin_level.unwrap_or(0),
        };
        let mut best = &self.places[0];
        for p in &self.places[1..] {
            if rank(p) > rank(best) {
                best = p;
            }
        }
        best
    }
}

/// Resolves a post's location. Native geotags bypass disambiguation. Returns
/// `None` when the post has no geotag and no gazetteer mentions.
pub fn resolve_post(post: &Post, gazetteer: &Gazetteer, w: &Weights) -> Option<GeoResolution> {
    if let Some(g) = post.native_geo {
        return Some(GeoResolution {
            post_id: post.id.clone(),
            created_at: post.created_at,
            places: vec![ResolvedPlace {
                entry_id: None,
                lat: g.lat,
                lon: g.lon,
                provenance: Provenance::Native,
                admin_level: None,
                surface: None,
            }],
            objective: 0.0,
            method: Method::Native,
        });
    }
    let mentions = extract_mentions(&post.text, gazetteer);
    let d = disambiguate(&mentions, w).ok()?;
    let places = mentions
        .iter()
        .zip(&d.chosen)
        .map(|(m, e)| ResolvedPlace {
            entry_id: Some(e.entry_id.clone()),
            lat: e.lat,
            lon: e.lon,
            provenance: Provenance::Gazetteer,
            admin_level: Some(e.admin_level),
            surface: Some(m.surface.clone()),
        })
        .collect();
    Some(GeoResolution {
        post_id: post.id.clone(),
        created_at: post.created_at,
        places,
        objective: d.objective,
        method: d.method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, lat: f64, lon: f64, admin: u8, pop: u64) -> GazetteerEntry {
        GazetteerEntry {
            entry_id: id.into(),
            canonical_name: id.into(),
            alt_names: vec![],
            lat,
            lon,
            admin_level: admin,
            population: pop,
            country: "XX".into(),
            polygon: None,
        }
    }

    fn mention<'g>(s: &str, c: Vec<&'g GazetteerEntry>) -> Mention<'g> {
        Mention {
            surface: s.into(),
            span: (0, 0),
            candidates: c,
        }
    }

    #[test]
    fn single_candidate() {
        let a = entry("a", 1.0, 1.0, 8, 10);
        let d = disambiguate(&[mention("a", vec![&a])], &Weights::default()).unwrap();
        assert_eq!(d.chosen[0].entry_id, "a");
        assert_eq!(d.method, Method::Exhaustive);
        assert!((d.objective - 0.5 * 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn paris_near_france() {
        let fr = entry("paris-fr", 48.8566, 2.3522, 8, 2_100_000);
        let tx = entry("paris-tx", 33.6609, -95.5555, 8, 25_000);
        let france = entry("france", 46.2276, 2.2137, 2, 67_000_000);
        let ms = [mention("Paris", vec![&tx, &fr]), mention("France", vec![&france])];
        let d = disambiguate(&ms, &Weights::default()).unwrap();
        assert_eq!(d.chosen[0].entry_id, "paris-fr");
        // brute force both assignments
        let j_fr = objective(&[&fr, &france], &Weights::default());
        let j_tx = objective(&[&tx, &france], &Weights::default());
        assert!(j_fr < j_tx);
        assert_eq!(d.objective, j_fr);
    }

    #[test]
    fn population_tie_break() {
        let fr = entry("paris-fr", 48.8566, 2.3522, 8, 2_100_000);
        let tx = entry("paris-tx", 33.6609, -95.5555, 8, 25_000);
        let d = disambiguate(&[mention("Paris", vec![&tx, &fr])], &Weights::default()).unwrap();
        assert_eq!(d.chosen[0].entry_id, "paris-fr");
        let a = entry("b", 0.0, 0.0, 8, 5);
        let b = entry("a", 1.0, 1.0, 8, 5);
        let d = disambiguate(&[mention("x", vec![&a, &b])], &Weights::default()).unwrap();
        assert_eq!(d.chosen[0].entry_id, "a");
    }

    #[test]
    fn specific_places_preferred() {
        let region = entry("region", 10.0, 10.0, 4, 1_000_000);
        let town = entry("town", 10.0, 10.0, 8, 1_000);
        let d = disambiguate(&[mention("x", vec![&region, &town])], &Weights::default()).unwrap();
        assert_eq!(d.chosen[0].entry_id, "town");
    }

    #[test]
    fn beam_for_large_products() {
        let cands: Vec<GazetteerEntry> = (0..12)
            .map(|i| entry(&format!("c{i:02}"), i as f64, i as f64 * 2.0, 8, 100 + i))
            .collect();
        let refs: Vec<&GazetteerEntry> = cands.iter().collect();
        let ms: Vec<Mention> = (0..4).map(|k| mention(&format!("m{k}"), refs.clone())).collect();
        let d = disambiguate(&ms, &Weights::default()).unwrap();
        assert_eq!(d.method, Method::Beam);
        assert!((d.objective - objective(&d.chosen, &Weights::default())).abs() < 1e-15);
        // all four at the same place is optimal (zero distance)
        assert!(d.chosen.iter().all(|e| e.entry_id == d.chosen[0].entry_id));
    }

    #[test]
    fn contract_violations() {
        assert_eq!(disambiguate(&[], &Weights::default()), Err(GeoError::NoMentions));
        assert_eq!(
            disambiguate(&[mention("x", vec![])], &Weights::default()),
            Err(GeoError::NoCandidates("x".into()))
        );
    }
}
