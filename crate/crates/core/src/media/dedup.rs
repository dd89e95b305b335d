//! Near-duplicate removal.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::dhash::{hamming, PerceptualHash};

pub const DEFAULT_MAX_DISTANCE: u32 = 10;

/// An item's image hashes, or the reason its media could not be decoded.
#[derive(Debug, Clone)]
pub struct HashedItem {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub hashes: Result<Vec<PerceptualHash>, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum DedupDecision {
    Kept,
    Removed { matched_kept_id: String, distance: u32 },
    Flagged { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub removed_id: String,
    pub matched_kept_id: String,
    pub distance: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupOutcome {
    /// Kept or flagged ids, in processing order.
    pub kept: Vec<String>,
    pub removed: Vec<Removal>,
    pub flagged: Vec<(String, String)>,
}

/// Decides every item, processing in `(created_at, id)` order. An item is
/// removed iff one of its images lies within `max_distance` of an image of an
/// already kept item; the closest kept image (earliest on ties) is reported.
/// Items whose media failed to decode are flagged and pass through without
/// registering hashes.
///
/// Returns decisions aligned with `items`.
pub fn dedup_decisions(items: &[HashedItem], max_distance: u32) -> Vec<DedupDecision> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        (items[a].created_at, &items[a].id).cmp(&(items[b].created_at, &items[b].id))
    });

    let mut kept_hashes: Vec<(PerceptualHash, usize)> = Vec::new();
    let mut out = vec![DedupDecision::Kept; items.len()];
    for i in order {
        let item = &items[i];
        let hashes = match &item.hashes {
            Ok(h) => h,
            Err(reason) => {
                out[i] = DedupDecision::Flagged {
                    reason: reason.clone(),
                };
                continue;
            }
        };
        let mut best: Option<(u32, usize)> = None;
        for h in hashes {
            for (pos, (k, _)) in kept_hashes.iter().enumerate() {
                let d = hamming(*h, *k);
                if d <= max_distance && best.is_none_or(|(bd, bp)| (d, pos) < (bd, bp)) {
                    best = Some((d, pos));
                }
            }
        }
        match best {
            Some((distance, pos)) => {
                out[i] = DedupDecision::Removed {
                    matched_kept_id: items[kept_hashes[pos].1].id.clone(),
                    distance,
                };
            }
            None => kept_hashes.extend(hashes.iter().map(|h| (*h, i))),
        }
    }
    out
}

pub fn dedup(items: &[HashedItem], max_distance: u32) -> DedupOutcome {
    let decisions = dedup_decisions(items, max_distance);
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        (items[a].created_at, &items[a].id).cmp(&(items[b].created_at, &items[b].id))
    });
    let mut out = DedupOutcome::default();
    for i in order {
        let id = items[i].id.clone();
        match &decisions[i] {
            DedupDecision::Kept => out.kept.push(id),
            DedupDecision::Flagged { reason } => {
                out.kept.push(id.clone());
                out.flagged.push((id, reason.clone()));
            }
            DedupDecision::Removed {
                matched_kept_id,
                distance,
            } => out.removed.push(Removal {
                removed_id: id,
                matched_kept_id: matched_kept_id.clone(),
                distance: *distance,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn item(id: &str, sec: i64, hashes: &[u64]) -> HashedItem {
        HashedItem {
            id: id.into(),
            created_at: Utc.timestamp_opt(1_600_000_000 + sec, 0).unwrap(),
            hashes: Ok(hashes.iter().map(|&h| PerceptualHash(h)).collect()),
        }
    }

    #[test]
    fn exact_duplicate_later_removed() {
        let items = vec![item("b", 10, &[0xdead_beef]), item("a", 0, &[0xdead_beef])];
        let out = dedup(&items, 10);
        assert_eq!(out.kept, ["a"]);
        assert_eq!(
            out.removed,
            [Removal {
                removed_id: "b".into(),
                matched_kept_id: "a".into(),
                distance: 0
            }]
        );
    }

    #[test]
    fn far_images_both_kept() {
        let items = vec![item("a", 0, &[0]), item("b", 1, &[0xFFF])];
        assert_eq!(dedup(&items, 10).kept, ["a", "b"]);
        assert_eq!(dedup(&items, 12).kept, ["a"]);
    }

    #[test]
    fn ties_on_time_use_id() {
        let items = vec![item("z", 0, &[7]), item("m", 0, &[7])];
        assert_eq!(dedup(&items, 0).kept, ["m"]);
    }

    #[test]
    fn undecodable_flagged_through() {
        let mut bad = item("bad", 1, &[]);
        bad.hashes = Err("truncated".into());
        let items = vec![item("a", 0, &[1]), bad, item("c", 2, &[1])];
        let out = dedup(&items, 10);
        assert_eq!(out.kept, ["a", "bad"]);
        assert_eq!(out.flagged, [("bad".to_string(), "truncated".to_string())]);
        assert_eq!(out.removed.len(), 1);
    }

    #[test]
    fn multi_image_item_matches_any() {
        let items = vec![item("a", 0, &[0b1]), item("b", 1, &[u64::MAX, 0b11])];
        let out = dedup(&items, 1);
        assert_eq!(out.removed[0].distance, 1);
    }

    #[test]
    fn closest_kept_image_reported() {
        let items = vec![item("a", 0, &[0b111]), item("b", 1, &[0xF000_0000]), item("c", 2, &[0xF000_0001])];
        let out = dedup(&items, 4);
        assert_eq!(out.removed[0].matched_kept_id, "b");
        assert_eq!(out.removed[0].distance, 1);
    }
}
