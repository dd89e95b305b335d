use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dictionary::Dictionary;
use super::model::{train, Hyperparameters};
use super::series::{count_series, Span};
use super::window::{make_windows, FeatureWindow, DEFAULT_WINDOW};
use super::{TriggerError, DEFAULT_BUCKET_SECS};
use crate::model::{EventRecord, Post};
use crate::stats::Confusion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoeoOptions {
    pub window: usize,
    pub bucket_secs: i64,
    /// Matched quiet windows per positive test window.
    pub negative_ratio: usize,
    pub hyperparameters: Hyperparameters,
}

impl Default for LoeoOptions {
    fn default() -> Self {
        LoeoOptions {
            window: DEFAULT_WINDOW,
            bucket_secs: DEFAULT_BUCKET_SECS,
            negative_ratio: 1,
            hyperparameters: Hyperparameters::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub event_id: String,
    pub train_windows: usize,
    pub test_windows: usize,
    pub matched_negatives: usize,
    pub confusion: Confusion,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoeoReport {
    pub folds: Vec<FoldResult>,
    pub micro: Confusion,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub options: LoeoOptions,
}

/// Train/test window indices for the fold holding out `events[held_out]`.
///
/// Test: every window overlapping the held-out span, plus for each positive
/// among them `ratio` quiet windows (overlapping no event) chosen nearest in
/// time to the span, earlier first on ties. Training: every other window
/// that does not overlap the held-out span.
pub fn fold_split(
    windows: &[FeatureWindow],
    events: &[EventRecord],
    held_out: usize,
    ratio: usize,
) -> (Vec<usize>, Vec<usize>, usize) {
    let ev = &events[held_out];
    let mut test: Vec<usize> = (0..windows.len()).filter(|&i| windows[i].overlaps(ev)).collect();
    let positives = test.iter().filter(|&&i| windows[i].label).count();

    let mut quiet: Vec<(i64, usize)> = (0..windows.len())
        .filter(|&i| !events.iter().any(|e| windows[i].overlaps(e)))
        .map(|i| {
            let w = &windows[i];
            let gap = if w.end <= ev.start {
                (ev.start - w.end).num_seconds()
            } else {
                (w.start - ev.end).num_seconds().max(0)
            };
            (gap, i)
        })
        .collect();
    quiet.sort();
    let matched: Vec<usize> = quiet.iter().take(positives * ratio).map(|&(_, i)| i).collect();
    let n_matched = matched.len();
    test.extend(matched);
    test.sort_unstable();

    let train: Vec<usize> = (0..windows.len())
        .filter(|i| test.binary_search(i).is_err() && !windows[*i].overlaps(ev))
        .collect();
    (train, test, n_matched)
}

/// Feature windows over the span covering the dictionary-language posts.
pub fn corpus_windows(
    posts: &[Post],
    events: &[EventRecord],
    dictionary: &Dictionary,
    window: usize,
    bucket_secs: i64,
) -> Result<Vec<FeatureWindow>, TriggerError> {
    let terms = dictionary.terms();
    if terms.is_empty() {
        return Err(TriggerError::EmptyDictionary);
    }
    let lang: Vec<Post> = posts
        .iter()
        .filter(|p| p.lang == dictionary.language)
        .cloned()
        .collect();
    let span = Span::covering(lang.iter().map(|p| &p.created_at), bucket_secs)
        .ok_or_else(|| TriggerError::NoPosts(dictionary.language.clone()))?;
    let series = count_series(&lang, &terms, &span);
    make_windows(&series, events, window)
}

/// Leave-one-event-out evaluation over the posts in the dictionary's
/// language. Folds are independent and run in parallel; each trains
/// deterministically, so results do not depend on scheduling.
pub fn evaluate_loeo(
    posts: &[Post],
    events: &[EventRecord],
    dictionary: &Dictionary,
    options: &LoeoOptions,
) -> Result<LoeoReport, TriggerError> {
    if events.len() < 2 {
        return Err(TriggerError::TooFewEvents(events.len()));
    }
    let windows = corpus_windows(posts, events, dictionary, options.window, options.bucket_secs)?;

    let folds = (0..events.len())
        .into_par_iter()
        .map(|k| {
            let (train_idx, test_idx, matched) = fold_split(&windows, events, k, options.negative_ratio);
            let train_set: Vec<FeatureWindow> = train_idx.iter().map(|&i| windows[i].clone()).collect();
            let (model, _) = train(&train_set, &options.hyperparameters)?;
            let mut confusion = Confusion::default();
            for &i in &test_idx {
                confusion.record(model.fires(&windows[i])?, windows[i].label);
            }
            Ok(FoldResult {
                event_id: events[k].event_id.clone(),
                train_windows: train_idx.len(),
                test_windows: test_idx.len(),
                matched_negatives: matched,
                precision: confusion.precision(),
                recall: confusion.recall(),
                confusion,
            })
        })
        .collect::<Result<Vec<_>, TriggerError>>()?;

    let micro = folds.iter().fold(Confusion::default(), |acc, f| acc + f.confusion);
    Ok(LoeoReport {
        folds,
        precision: micro.precision(),
        recall: micro.recall(),
        micro,
        options: *options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_utc;
    use crate::trigger::TermSeries;
    use chrono::Duration;

    fn event(id: &str, from_h: i64, to_h: i64) -> EventRecord {
        let o = parse_utc("2021-06-01T00:00:00Z").unwrap();
        EventRecord {
            event_id: id.into(),
            event_type: "flood".into(),
            country: "NP".into(),
            start: o + Duration::hours(from_h),
            end: o + Duration::hours(to_h),
            name: id.into(),
        }
    }

    fn posts_for(events: &[EventRecord], hours: i64) -> Vec<Post> {
        let o = parse_utc("2021-06-01T00:00:00Z").unwrap();
        let mut out = Vec::new();
        for h in 0..hours {
            let t = o + Duration::hours(h) + Duration::minutes(10);
            let hot = events.iter().any(|e| e.active_during(t, t + Duration::seconds(1)));
            let n = if hot { 8 } else { 1 };
            for j in 0..n {
                out.push(Post {
                    id: format!("{h}-{j}"),
                    created_at: t,
                    lang: "en".into(),
                    text: if hot { "flood water".into() } else { "sunny water".into() },
                    media: vec![],
                    native_geo: None,
                    is_repost: false,
                });
            }
        }
        out
    }

    #[test]
    fn one_fold_per_event() {
        let events = vec![event("a", 10, 16), event("b", 40, 46), event("c", 70, 76)];
        let posts = posts_for(&events, 100);
        let dict = Dictionary::seeds_only("en", vec!["flood".into(), "water".into()]);
        let opts = LoeoOptions {
            window: 3,
            ..Default::default()
        };
        let r = evaluate_loeo(&posts, &events, &dict, &opts).unwrap();
        assert_eq!(r.folds.len(), 3);
        // Signal is clean, so every fold is perfect.
        for f in &r.folds {
            assert_eq!(f.precision, Some(1.0), "{f:?}");
            assert_eq!(f.recall, Some(1.0));
        }
        let sum = r.folds.iter().map(|f| f.confusion.total()).sum::<u64>();
        assert_eq!(r.micro.total(), sum);
    }

    #[test]
    fn too_few_events() {
        let dict = Dictionary::seeds_only("en", vec!["flood".into()]);
        assert_eq!(
            evaluate_loeo(&[], &[event("a", 0, 1)], &dict, &Default::default()).unwrap_err(),
            TriggerError::TooFewEvents(1)
        );
    }

    #[test]
    fn split_is_disjoint_and_matched() {
        let events = vec![event("a", 10, 12), event("b", 30, 32)];
        let s = TermSeries {
            term: "x".into(),
            bucket_width: 3600,
            origin: parse_utc("2021-06-01T00:00:00Z").unwrap(),
            counts: vec![0; 48],
        };
        let w = make_windows(&[s], &events, 2).unwrap();
        let (train, test, matched) = fold_split(&w, &events, 0, 1);
        assert_eq!(matched, 2);
        assert!(train.iter().all(|i| !test.contains(i)));
        assert!(train.iter().all(|&i| !w[i].overlaps(&events[0])));
        // windows ending at buckets 10..=12 overlap [10h,12h): 3 of them,
        // plus 2 matched quiet ones.
        assert_eq!(test.len(), 5);
    }
}
