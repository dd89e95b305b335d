//! Per-item confidence scorers and the threshold decision.
//!
//! Builtin scorers run in-process. External scorers speak a small JSON
//! protocol: `POST <endpoint>` with `{"item_id", "media", "text"}` where
//! `media` is a base64-encoded PGM, answered by `{"score": number}`. Items with
//! several images are scored per image and the item score is the maximum.

use std::fmt;
use std::time::Duration;

use base64::Engine as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::pgm::LuminanceImage;

pub const PHOTO_ENTROPY: &str = "photo-entropy";
pub const NSFW_STUB: &str = "nsfw-stub";
pub const DHASH_DEDUP: &str = "dhash-dedup";
pub const BUILTIN_SCORERS: [&str; 2] = [PHOTO_ENTROPY, NSFW_STUB];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Builtin,
    External,
}

/// What to do when an external scorer cannot be reached or times out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailurePolicy {
    DefaultScore(f64),
    RejectItem,
}

impl Serialize for FailurePolicy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FailurePolicy::DefaultScore(v) => s.serialize_f64(*v),
            FailurePolicy::RejectItem => s.serialize_str("reject-item"),
        }
    }
}

impl<'de> Deserialize<'de> for FailurePolicy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if (0.0..=1.0).contains(&v) => Ok(FailurePolicy::DefaultScore(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!(
                "default score {v} outside [0, 1]"
            ))),
            Raw::Str(s) if s == "reject-item" => Ok(FailurePolicy::RejectItem),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "unknown failure policy {s:?} (expected a score or \"reject-item\")"
            ))),
        }
    }
}

fn default_timeout() -> u64 {
    2000
}

fn default_policy() -> FailurePolicy {
    FailurePolicy::RejectItem
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerBinding {
    pub scorer_id: String,
    pub kind: ScorerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default = "default_policy")]
    pub default_score_on_failure: FailurePolicy,
}

impl ScorerBinding {
    pub fn builtin(scorer_id: &str) -> Self {
        ScorerBinding {
            scorer_id: scorer_id.into(),
            kind: ScorerKind::Builtin,
            endpoint: None,
            timeout_ms: default_timeout(),
            default_score_on_failure: default_policy(),
        }
    }

    pub fn external(scorer_id: &str, endpoint: &str, timeout_ms: u64, policy: FailurePolicy) -> Self {
        ScorerBinding {
            scorer_id: scorer_id.into(),
            kind: ScorerKind::External,
            endpoint: Some(endpoint.into()),
            timeout_ms,
            default_score_on_failure: policy,
        }
    }

    pub fn validate(&self) -> Result<(), ScorerError> {
        match self.kind {
            ScorerKind::External if self.endpoint.as_deref().is_none_or(str::is_empty) => {
                Err(ScorerError::MissingEndpoint(self.scorer_id.clone()))
            }
            ScorerKind::Builtin if !BUILTIN_SCORERS.contains(&self.scorer_id.as_str()) => {
                Err(ScorerError::UnknownBuiltin(self.scorer_id.clone()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScorerError {
    #[error("external scorer {0:?} has no endpoint")]
    MissingEndpoint(String),
    #[error("unknown builtin scorer {0:?}")]
    UnknownBuiltin(String),
}

/// One image of an item: decoded pixels plus the bytes they came from, or
/// the decode failure.
#[derive(Debug, Clone)]
pub enum MediaBlob {
    Decoded { image: LuminanceImage, bytes: Vec<u8> },
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct ScoreItem<'a> {
    pub item_id: &'a str,
    pub text: &'a str,
    pub media: &'a [MediaBlob],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ScoreOutcome {
    Scored { score: f64 },
    /// Scorer failed; the binding's default score was used.
    Defaulted { score: f64, error: String },
    /// Scorer failed under the reject-item policy.
    Rejected { error: String },
    /// Item could not be scored (bad media or protocol violation); it passes
    /// through unfiltered.
    Flagged { error: String },
}

impl ScoreOutcome {
    pub fn score(&self) -> Option<f64> {
        match self {
            ScoreOutcome::Scored { score } | ScoreOutcome::Defaulted { score, .. } => Some(*score),
            _ => None,
        }
    }

    /// Transport-level failure (counts against a run's failure budget).
    pub fn is_failure(&self) -> bool {
        matches!(self, ScoreOutcome::Defaulted { .. } | ScoreOutcome::Rejected { .. })
    }
}

/// Shannon entropy of the luminance histogram in bits, divided by 8.
pub fn photo_score(img: &LuminanceImage) -> f64 {
    let n = img.pixels().len() as f64;
    let h: f64 = img
        .histogram()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    (h / 8.0).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "keep-if-ge", alias = "keep-if-≥")]
    KeepIfGe,
    #[serde(rename = "keep-if-le", alias = "keep-if-≤")]
    KeepIfLe,
}

impl Direction {
    pub fn keeps(self, score: f64, threshold: f64) -> bool {
        match self {
            Direction::KeepIfGe => score >= threshold,
            Direction::KeepIfLe => score <= threshold,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::KeepIfGe => "keep-if-ge",
            Direction::KeepIfLe => "keep-if-le",
        })
    }
}

pub fn threshold_filter(scores: &[f64], threshold: f64, direction: Direction) -> Vec<bool> {
    scores.iter().map(|&s| direction.keeps(s, threshold)).collect()
}

#[derive(Serialize)]
struct ExternalRequest<'a> {
    item_id: &'a str,
    media: String,
    text: &'a str,
}

#[derive(Deserialize)]
struct ExternalResponse {
    score: f64,
}

enum CallError {
    Transport(String),
    Protocol(String),
}

/// A binding ready to score items; holds the HTTP agent for external
/// scorers.
pub struct Scorer {
    binding: ScorerBinding,
    agent: Option<ureq::Agent>,
}

impl fmt::Debug for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scorer").field("binding", &self.binding).finish()
    }
}

impl Scorer {
    pub fn new(binding: ScorerBinding) -> Result<Self, ScorerError> {
        binding.validate()?;
        let agent = match binding.kind {
            ScorerKind::External => Some(
                ureq::Agent::config_builder()
                    .timeout_global(Some(Duration::from_millis(binding.timeout_ms)))
                    .http_status_as_error(true)
                    .build()
                    .into(),
            ),
            ScorerKind::Builtin => None,
        };
        Ok(Scorer { binding, agent })
    }

    pub fn binding(&self) -> &ScorerBinding {
        &self.binding
    }

    pub fn score(&self, item: &ScoreItem<'_>) -> ScoreOutcome {
        match self.binding.kind {
            ScorerKind::Builtin => self.score_builtin(item),
            ScorerKind::External => self.score_external(item),
        }
    }

    fn score_builtin(&self, item: &ScoreItem<'_>) -> ScoreOutcome {
        match self.binding.scorer_id.as_str() {
            NSFW_STUB => ScoreOutcome::Scored { score: 0.0 },
            PHOTO_ENTROPY => {
                let mut best: Option<f64> = None;
                for m in item.media {
                    match m {
                        MediaBlob::Decoded { image, .. } => {
                            let s = photo_score(image);
                            best = Some(best.map_or(s, |b| b.max(s)));
                        }
                        MediaBlob::Failed(e) => {
                            return ScoreOutcome::Flagged {
                                error: format!("undecodable media: {e}"),
                            }
                        }
                    }
                }
                match best {
                    Some(score) => ScoreOutcome::Scored { score },
                    None => ScoreOutcome::Flagged {
                        error: "item has no media".into(),
                    },
                }
            }
            other => ScoreOutcome::Flagged {
                error: format!("unknown builtin scorer {other:?}"),
            },
        }
    }

    fn score_external(&self, item: &ScoreItem<'_>) -> ScoreOutcome {
        let mut best: Option<f64> = None;
        let blobs: Vec<Option<&[u8]>> = if item.media.is_empty() {
            vec![None]
        } else {
            item.media
                .iter()
                .map(|m| match m {
                    MediaBlob::Decoded { bytes, .. } => Some(bytes.as_slice()),
                    MediaBlob::Failed(_) => None,
                })
                .collect()
        };
        for (i, bytes) in blobs.into_iter().enumerate() {
            if bytes.is_none() && !item.media.is_empty() {
                if let MediaBlob::Failed(e) = &item.media[i] {
                    return ScoreOutcome::Flagged {
                        error: format!("undecodable media: {e}"),
                    };
                }
            }
            match self.call(item, bytes.unwrap_or_default()) {
                Ok(s) => best = Some(best.map_or(s, |b| b.max(s))),
                Err(CallError::Protocol(error)) => {
                    log::warn!("scorer {}: item {}: {error}", self.binding.scorer_id, item.item_id);
                    return ScoreOutcome::Flagged { error };
                }
                Err(CallError::Transport(error)) => {
                    log::warn!("scorer {}: item {}: {error}", self.binding.scorer_id, item.item_id);
                    return match self.binding.default_score_on_failure {
                        FailurePolicy::DefaultScore(score) => ScoreOutcome::Defaulted { score, error },
                        FailurePolicy::RejectItem => ScoreOutcome::Rejected { error },
                    };
                }
            }
        }
        ScoreOutcome::Scored {
            score: best.unwrap_or(0.0),
        }
    }

    fn call(&self, item: &ScoreItem<'_>, media: &[u8]) -> Result<f64, CallError> {
        let agent = self.agent.as_ref().expect("external scorer has an agent");
        let endpoint = self.binding.endpoint.as_deref().unwrap_or_default();
        let body = ExternalRequest {
            item_id: item.item_id,
            media: base64::engine::general_purpose::STANDARD.encode(media),
            text: item.text,
        };
        let mut resp = agent
            .post(endpoint)
            .send_json(&body)
            .map_err(|e| CallError::Transport(e.to_string()))?;
        let parsed: ExternalResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| match e {
                ureq::Error::Timeout(_) | ureq::Error::Io(_) => CallError::Transport(e.to_string()),
                other => CallError::Protocol(format!("bad scorer response: {other}")),
            })?;
        if !(0.0..=1.0).contains(&parsed.score) {
            return Err(CallError::Protocol(format!(
                "score {} outside [0, 1]",
                parsed.score
            )));
        }
        Ok(parsed.score)
    }
}

/// Scores one item with a binding.
pub fn score_with(binding: &ScorerBinding, item: &ScoreItem<'_>) -> Result<ScoreOutcome, ScorerError> {
    Ok(Scorer::new(binding.clone())?.score(item))
}
