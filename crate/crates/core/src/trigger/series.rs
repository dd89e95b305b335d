use std::collections::HashMap;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::{Dictionary, TriggerError};
use crate::model::{EventRecord, Post};
use crate::text;

/// Half-open time range `[origin, end)` aligned to a bucket width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    #[serde(with = "crate::model::utc_seconds")]
    pub origin: DateTime<Utc>,
    #[serde(with = "crate::model::utc_seconds")]
    pub end: DateTime<Utc>,
    pub bucket_secs: i64,
}

impl Span {
    pub fn new(origin: DateTime<Utc>, end: DateTime<Utc>, bucket_secs: i64) -> Result<Self, TriggerError> {
        if bucket_secs <= 0 || end <= origin {
            return Err(TriggerError::BadSpan);
        }
        if origin.timestamp().rem_euclid(bucket_secs) != 0 || end.timestamp().rem_euclid(bucket_secs) != 0 {
            return Err(TriggerError::MisalignedSpan(bucket_secs));
        }
        Ok(Span {
            origin,
            end,
            bucket_secs,
        })
    }

    /// Smallest aligned span containing every timestamp.
    pub fn covering<'a>(
        times: impl IntoIterator<Item = &'a DateTime<Utc>>,
        bucket_secs: i64,
    ) -> Option<Self> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for t in times {
            lo = lo.min(t.timestamp());
            hi = hi.max(t.timestamp());
        }
        if lo > hi || bucket_secs <= 0 {
            return None;
        }
        let origin = lo - lo.rem_euclid(bucket_secs);
        let end = hi - hi.rem_euclid(bucket_secs) + bucket_secs;
        Some(Span {
            origin: DateTime::from_timestamp(origin, 0)?,
            end: DateTime::from_timestamp(end, 0)?,
            bucket_secs,
        })
    }

    pub fn len(&self) -> usize {
        ((self.end - self.origin).num_seconds() / self.bucket_secs) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bucket_of(&self, t: &DateTime<Utc>) -> Option<usize> {
        if *t < self.origin || *t >= self.end {
            return None;
        }
        Some(((*t - self.origin).num_seconds() / self.bucket_secs) as usize)
    }

    pub fn bucket_start(&self, i: usize) -> DateTime<Utc> {
        self.origin + Duration::seconds(self.bucket_secs * i as i64)
    }

    pub fn bucket_end(&self, i: usize) -> DateTime<Utc> {
        self.bucket_start(i + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSeries {
    pub term: String,
    pub bucket_width: i64,
    #[serde(with = "crate::model::utc_seconds")]
    pub origin: DateTime<Utc>,
    pub counts: Vec<u64>,
}

impl TermSeries {
    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Per-bucket number of posts whose normalized token set contains each
/// term. Posts outside the span are ignored.
pub fn count_series(posts: &[Post], terms: &[String], span: &Span) -> Vec<TermSeries> {
    let index: HashMap<&str, usize> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut counts = vec![vec![0u64; span.len()]; terms.len()];
    for post in posts {
        let Some(b) = span.bucket_of(&post.created_at) else {
            continue;
        };
        for tok in text::token_set(&post.text) {
            if let Some(&i) = index.get(tok.as_str()) {
                counts[i][b] += 1;
            }
        }
    }
    terms
        .iter()
        .zip(counts)
        .map(|(term, counts)| TermSeries {
            term: term.clone(),
            bucket_width: span.bucket_secs,
            origin: span.origin,
            counts,
        })
        .collect()
}

pub fn bucket_term_counts(
    posts: &[Post],
    dictionary: &Dictionary,
    bucket_secs: i64,
    span: (DateTime<Utc>, DateTime<Utc>),
) -> Result<Vec<TermSeries>, TriggerError> {
    let terms = dictionary.terms();
    if terms.is_empty() {
        return Err(TriggerError::EmptyDictionary);
    }
    let span = Span::new(span.0, span.1, bucket_secs)?;
    Ok(count_series(posts, &terms, &span))
}

/// 1.0 for buckets overlapping any event, else 0.0.
pub fn event_activity(events: &[EventRecord], span: &Span) -> Vec<f64> {
    (0..span.len())
        .map(|i| {
            let (a, b) = (span.bucket_start(i), span.bucket_end(i));
            if events.iter().any(|e| e.active_during(a, b)) {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}
