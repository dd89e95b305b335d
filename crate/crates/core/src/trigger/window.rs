use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::series::TermSeries;
use super::TriggerError;
use crate::model::EventRecord;

pub const DEFAULT_WINDOW: usize = 24;

/// `window` consecutive buckets of `ln(1 + count)` features ending at
/// bucket `end_bucket`. Rows are buckets (oldest first), columns follow
/// `terms`. Scaling is applied later by the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub terms: Vec<String>,
    pub window: usize,
    pub matrix: Vec<Vec<f64>>,
    pub label: bool,
    pub event_id: Option<String>,
    pub end_bucket: usize,
    #[serde(with = "crate::model::utc_seconds")]
    pub start: DateTime<Utc>,
    /// Exclusive end of the final bucket.
    #[serde(with = "crate::model::utc_seconds")]
    pub end: DateTime<Utc>,
}

impl FeatureWindow {
    pub fn flatten(&self) -> Vec<f64> {
        self.matrix.iter().flatten().copied().collect()
    }

    pub fn overlaps(&self, event: &EventRecord) -> bool {
        event.active_during(self.start, self.end)
    }
}

pub fn make_windows(
    series: &[TermSeries],
    events: &[EventRecord],
    window: usize,
) -> Result<Vec<FeatureWindow>, TriggerError> {
    if window == 0 {
        return Err(TriggerError::EmptyWindow);
    }
    let Some(first) = series.first() else {
        return Err(TriggerError::EmptyDictionary);
    };
    let len = first.counts.len();
    if series.iter().any(|s| {
        s.counts.len() != len || s.origin != first.origin || s.bucket_width != first.bucket_width
    }) {
        return Err(TriggerError::GridMismatch);
    }
    if window > len {
        return Err(TriggerError::WindowTooLong { window, len });
    }
    let width = first.bucket_width;
    let at = |i: usize| first.origin + Duration::seconds(width * i as i64);
    let terms: Vec<String> = series.iter().map(|s| s.term.clone()).collect();

    Ok((window - 1..len)
        .map(|t| {
            let lo = t + 1 - window;
            let matrix = (lo..=t)
                .map(|b| series.iter().map(|s| (s.counts[b] as f64).ln_1p()).collect())
                .collect();
            let (fa, fb) = (at(t), at(t + 1));
            let active = events.iter().find(|e| e.active_during(fa, fb));
            FeatureWindow {
                terms: terms.clone(),
                window,
                matrix,
                label: active.is_some(),
                event_id: active.map(|e| e.event_id.clone()),
                end_bucket: t,
                start: at(lo),
                end: fb,
            }
        })
        .collect())
}
