//! Image filter components: near-duplicate removal, photo scoring and
//! pluggable external scorers.

pub mod dedup;
pub mod dhash;
pub mod pgm;
pub mod scorer;

use std::path::Path;

pub use dedup::{
    dedup, dedup_decisions, DedupDecision, DedupOutcome, HashedItem, Removal, DEFAULT_MAX_DISTANCE,
};
pub use dhash::{dhash, hamming, PerceptualHash};
pub use pgm::{ImageError, LuminanceImage};
pub use scorer::{
    photo_score, score_with, threshold_filter, Direction, FailurePolicy, MediaBlob, ScoreItem,
    ScoreOutcome, Scorer, ScorerBinding, ScorerError, ScorerKind, DHASH_DEDUP, NSFW_STUB,
    PHOTO_ENTROPY,
};

/// Reads and decodes a PGM file.
pub fn load_blob(path: &Path) -> MediaBlob {
    match std::fs::read(path) {
        Ok(bytes) => match LuminanceImage::decode_pgm(&bytes) {
            Ok(image) => MediaBlob::Decoded { image, bytes },
            Err(e) => MediaBlob::Failed(format!("{}: {e}", path.display())),
        },
        Err(e) => MediaBlob::Failed(format!("{}: {e}", path.display())),
    }
}
