//! Event-onset detection from keyword time series.
//!
//! Posts are bucketed into per-term count series, a dictionary of terms is
//! learned from correlation with known event spans, sliding feature windows
//! are fed to a logistic-regression classifier, and the whole chain is
//! evaluated leave-one-event-out.

mod dictionary;
mod loeo;
mod model;
mod series;
mod window;

pub use dictionary::{build_dictionary, DictionaryParams, Dictionary, LearnedTerm};
pub use loeo::{corpus_windows, evaluate_loeo, fold_split, FoldResult, LoeoOptions, LoeoReport};
pub use model::{
    descend, loss_and_gradient, predict, sigmoid, train, Design, Hyperparameters, Scaling, TrainReport,
    TriggerModel,
};
pub use series::{bucket_term_counts, count_series, event_activity, Span, TermSeries};
pub use window::{make_windows, FeatureWindow, DEFAULT_WINDOW};

pub use crate::stats::pearson;

use thiserror::Error;

pub const DEFAULT_BUCKET_SECS: i64 = 3600;

#[derive(Debug, Error, PartialEq)]
pub enum TriggerError {
    #[error("dictionary is empty: nothing to count")]
    EmptyDictionary,
    #[error("span is not aligned to the {0}s bucket width")]
    MisalignedSpan(i64),
    #[error("invalid span or bucket width")]
    BadSpan,
    #[error("no posts in language {0:?}")]
    NoPosts(String),
    #[error("no events supplied")]
    NoEvents,
    #[error("series do not share a bucket grid")]
    GridMismatch,
    #[error("window of {window} buckets exceeds series length {len}")]
    WindowTooLong { window: usize, len: usize },
    #[error("window length must be positive")]
    EmptyWindow,
    #[error("training set has a single class ({positives} positive, {negatives} negative windows); collect more data spanning both event and quiet periods")]
    SingleClass { positives: usize, negatives: usize },
    #[error("leave-one-event-out needs at least 2 events, got {0}")]
    TooFewEvents(usize),
    #[error("model expects {expected} features, window has {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}
