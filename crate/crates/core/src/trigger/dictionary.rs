use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::series::{count_series, event_activity, Span};
use super::{TriggerError, DEFAULT_BUCKET_SECS};
use crate::model::{EventRecord, Post};
use crate::stats::pearson;
use crate::text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedTerm {
    pub term: String,
    pub score: f64,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    pub language: String,
    pub seeds: Vec<String>,
    /// Sorted by score, descending.
    pub learned: Vec<LearnedTerm>,
    pub k: usize,
}

impl Dictionary {
    pub fn seeds_only(language: &str, seeds: Vec<String>) -> Self {
        let seeds = normalize_seeds(&seeds);
        Dictionary {
            language: language.into(),
            seeds,
            learned: Vec::new(),
            k: 0,
        }
    }

    /// Seeds first, then learned terms, without repeats.
    pub fn terms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in self.seeds.iter().chain(self.learned.iter().map(|l| &l.term)) {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DictionaryParams {
    pub k: usize,
    pub min_freq: u64,
    pub min_corr: f64,
    pub bucket_secs: i64,
}

impl Default for DictionaryParams {
    fn default() -> Self {
        DictionaryParams {
            k: 25,
            min_freq: 50,
            min_corr: 0.3,
            bucket_secs: DEFAULT_BUCKET_SECS,
        }
    }
}

fn normalize_seeds(seeds: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in seeds {
        let n = text::normalize(s.trim());
        if !n.is_empty() && !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

/// Learns terms whose hourly document-frequency series correlates with the
/// binary event-activity series. Candidates are tokens of `language` posts
/// occurring in at least `min_freq` posts; the top `k` with correlation at
/// least `min_corr` are kept (ties broken lexicographically). Seeds are
/// always part of the term set and are not repeated among learned terms.
pub fn build_dictionary(
    posts: &[Post],
    events: &[EventRecord],
    language: &str,
    seeds: &[String],
    params: &DictionaryParams,
) -> Result<Dictionary, TriggerError> {
    if events.is_empty() {
        return Err(TriggerError::NoEvents);
    }
    let lang_posts: Vec<Post> = posts.iter().filter(|p| p.lang == language).cloned().collect();
    if lang_posts.is_empty() {
        return Err(TriggerError::NoPosts(language.into()));
    }
    let span = Span::covering(lang_posts.iter().map(|p| &p.created_at), params.bucket_secs)
        .ok_or(TriggerError::BadSpan)?;
    let seeds = normalize_seeds(seeds);

    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    for p in &lang_posts {
        for tok in text::token_set(&p.text) {
            *freq.entry(tok).or_default() += 1;
        }
    }
    let seed_set: BTreeSet<&str> = seeds.iter().map(String::as_str).collect();
    let candidates: Vec<String> = freq
        .iter()
        .filter(|(t, &f)| f >= params.min_freq && !seed_set.contains(t.as_str()))
        .map(|(t, _)| t.clone())
        .collect();

    let mut learned = Vec::new();
    if !candidates.is_empty() && span.len() >= 2 {
        let activity = event_activity(events, &span);
        let series = count_series(&lang_posts, &candidates, &span);
        for s in series {
            let score = pearson(&s.as_f64(), &activity)?;
            if score >= params.min_corr {
                learned.push(LearnedTerm {
                    frequency: freq[&s.term],
                    term: s.term,
                    score,
                });
            }
        }
    }
    learned.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.cmp(&b.term)));
    learned.truncate(params.k);
    Ok(Dictionary {
        language: language.into(),
        seeds,
        learned,
        k: params.k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_utc;
    use chrono::Duration;

    fn post(i: usize, hour: i64, text: &str) -> Post {
        Post {
            id: format!("p{i}"),
            created_at: parse_utc("2021-06-01T00:00:00Z").unwrap() + Duration::minutes(hour * 60 + 7),
            lang: "fr".into(),
            text: text.into(),
            media: vec![],
            native_geo: None,
            is_repost: false,
        }
    }

    fn event(start_h: i64, end_h: i64) -> EventRecord {
        let o = parse_utc("2021-06-01T00:00:00Z").unwrap();
        EventRecord {
            event_id: "e1".into(),
            event_type: "flood".into(),
            country: "FR".into(),
            start: o + Duration::hours(start_h),
            end: o + Duration::hours(end_h),
            name: "test".into(),
        }
    }

    /// 20 hours; "inondation" appears 6 times per hour during hours 5..10
    /// only, "pluie" twice every hour, "rare" 10 times total.
    fn fixture() -> (Vec<Post>, Vec<EventRecord>) {
        let mut posts = Vec::new();
        for h in 0..20 {
            for _ in 0..2 {
                posts.push(post(posts.len(), h, "pluie aujourd'hui"));
            }
            if (5..10).contains(&h) {
                for _ in 0..6 {
                    posts.push(post(posts.len(), h, "inondation en ville"));
                }
            }
            if h < 10 {
                posts.push(post(posts.len(), h, "rare"));
            }
        }
        (posts, vec![event(5, 10)])
    }

    #[test]
    fn learns_event_term() {
        let (posts, events) = fixture();
        let params = DictionaryParams {
            k: 25,
            min_freq: 20,
            min_corr: 0.3,
            bucket_secs: 3600,
        };
        let d = build_dictionary(&posts, &events, "fr", &["crue".into()], &params).unwrap();
        // Series for "inondation" is 6 * activity exactly, so pearson = 1
        // (by hand: both vectors are affine images of the same 0/1 series).
        let terms: Vec<_> = d.learned.iter().map(|l| l.term.as_str()).collect();
        assert!(terms.contains(&"inondation"), "{terms:?}");
        let inond = d.learned.iter().find(|l| l.term == "inondation").unwrap();
        assert!((inond.score - 1.0).abs() < 1e-12);
        // "en" and "ville" co-occur exactly with "inondation"; ties sorted by term
        assert_eq!(terms, ["en", "inondation", "ville"]);
        // seed kept even with zero occurrences
        assert!(d.terms().contains(&"crue".to_string()));
        // "rare" has frequency 10 < 20
        assert!(!terms.contains(&"rare"));
    }

    #[test]
    fn frequency_gate_applies_before_correlation() {
        let (posts, events) = fixture();
        let params = DictionaryParams {
            min_freq: 50,
            ..Default::default()
        };
        let d = build_dictionary(&posts, &events, "fr", &[], &params).unwrap();
        assert!(d.learned.is_empty());
    }

    #[test]
    fn learned_invariants() {
        let (posts, events) = fixture();
        let params = DictionaryParams {
            k: 1,
            min_freq: 1,
            min_corr: -1.0,
            bucket_secs: 3600,
        };
        let d = build_dictionary(&posts, &events, "fr", &[], &params).unwrap();
        assert_eq!(d.learned.len(), 1);
        assert!(d.learned.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn errors() {
        let (posts, events) = fixture();
        assert_eq!(
            build_dictionary(&posts, &[], "fr", &[], &Default::default()),
            Err(TriggerError::NoEvents)
        );
        assert_eq!(
            build_dictionary(&posts, &events, "de", &[], &Default::default()),
            Err(TriggerError::NoPosts("de".into()))
        );
    }
}
