//! Text normalization and tokenization shared by term counting and toponym
//! extraction.
//!
//! Normalization is NFKC followed by Unicode default case folding. Tokens are
//! Unicode words (UAX #29) of the original text; URLs and `@`-handles are
//! dropped, and hashtags contribute their tag text (the `#` is not a word
//! character, so segmentation strips it).

use std::collections::BTreeSet;

use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

/// NFKC + case fold.
pub fn normalize(s: &str) -> String {
    let nfkc: String = s.nfkc().collect();
    caseless::default_case_fold_str(&nfkc)
}

/// A normalized word with its position in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub norm: String,
    /// Byte range in the source text.
    pub bytes: (usize, usize),
    /// Character range in the source text.
    pub chars: (usize, usize),
}

fn is_dropped_chunk(chunk: &str) -> bool {
    let lower = chunk.to_ascii_lowercase();
    chunk.starts_with('@')
        || lower.starts_with("http://")
        || lower.starts_with("https://")
        || lower.starts_with("www.")
}

/// Byte ranges of whitespace-separated chunks that must not produce tokens.
fn dropped_ranges(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                if is_dropped_chunk(&text[s..i]) {
                    out.push((s, i));
                }
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        if is_dropped_chunk(&text[s..]) {
            out.push((s, text.len()));
        }
    }
    out
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let dropped = dropped_ranges(text);
    let mut out = Vec::new();
    let mut char_pos = 0usize;
    let mut last_byte = 0usize;
    let mut d = 0usize;
    for (start, word) in text.unicode_word_indices() {
        let end = start + word.len();
        char_pos += text[last_byte..start].chars().count();
        let word_chars = word.chars().count();
        last_byte = end;
        let char_span = (char_pos, char_pos + word_chars);
        char_pos += word_chars;

        while d < dropped.len() && dropped[d].1 <= start {
            d += 1;
        }
        if d < dropped.len() && dropped[d].0 <= start && end <= dropped[d].1 {
            continue;
        }
        let norm = normalize(word);
        if norm.is_empty() {
            continue;
        }
        out.push(Token {
            norm,
            bytes: (start, end),
            chars: char_span,
        });
    }
    out
}

/// Distinct normalized tokens of a text.
pub fn token_set(text: &str) -> BTreeSet<String> {
    tokenize(text).into_iter().map(|t| t.norm).collect()
}

/// Normalized lookup key for a (possibly multi-word) name: its tokens joined
/// by single spaces. `None` when the name has no word content.
pub fn name_key(name: &str) -> Option<String> {
    let toks = tokenize(name);
    if toks.is_empty() {
        return None;
    }
    Some(
        toks.iter()
            .map(|t| t.norm.as_str())
            .collect::<Vec<_>>()
            .join(" "),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn casefold_and_punctuation() {
        assert!(token_set("FLOOD!").contains("flood"));
        assert_eq!(normalize("Straße"), "strasse");
        assert_eq!(normalize("ﬁre"), "fire");
    }

    #[test]
    fn hashtags_urls_handles() {
        let toks: Vec<_> = tokenize("#Flood near @bob see https://t.co/xyz now")
            .into_iter()
            .map(|t| t.norm)
            .collect();
        assert_eq!(toks, vec!["flood", "near", "see", "now"]);
    }

    #[test]
    fn char_spans_follow_source() {
        let text = "inundación en Málaga";
        let toks = tokenize(text);
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[2].chars, (14, 20));
        let s: String = text.chars().skip(14).take(6).collect();
        assert_eq!(s, "Málaga");
    }

    #[test]
    fn name_keys() {
        assert_eq!(name_key("Paris, TX").as_deref(), Some("paris tx"));
        assert_eq!(name_key("  New   York City ").as_deref(), Some("new york city"));
        assert_eq!(name_key(" -- "), None);
    }
}
