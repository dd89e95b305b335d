use serde::Serialize;

use crate::ingest::Gazetteer;
use crate::model::GazetteerEntry;
use crate::text;

/// Longest n-gram considered as a place name.
pub const MAX_NGRAM: usize = 3;

/// A place-name occurrence with its gazetteer candidates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mention<'g> {
    pub surface: String,
    /// Character offsets `[start, end)` in the source text.
    pub span: (usize, usize),
    #[serde(skip)]
    pub candidates: Vec<&'g GazetteerEntry>,
}

/// Finds gazetteer names in `text`. Longer matches win over overlapping
/// shorter ones; among equal lengths the leftmost wins. Output is ordered by
/// position and spans never overlap.
pub fn extract_mentions<'g>(text_in: &str, gazetteer: &'g Gazetteer) -> Vec<Mention<'g>> {
    let tokens = text::tokenize(text_in);
    let max_n = MAX_NGRAM.min(gazetteer.max_name_tokens().max(1));

    // (start token, n, candidates)
    let mut found = Vec::new();
    let mut key = String::new();
    for i in 0..tokens.len() {
        key.clear();
        for n in 1..=max_n.min(tokens.len() - i) {
            if n > 1 {
                key.push(' ');
            }
            key.push_str(&tokens[i + n - 1].norm);
            let cands = gazetteer.lookup_key(&key);
            if !cands.is_empty() {
                found.push((i, n, cands));
            }
        }
    }
    found.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut taken = vec![false; tokens.len()];
    let mut chosen = Vec::new();
    for (i, n, cands) in found {
        if taken[i..i + n].iter().any(|&t| t) {
            continue;
        }
        taken[i..i + n].iter_mut().for_each(|t| *t = true);
        chosen.push((i, n, cands));
    }
    chosen.sort_by_key(|c| c.0);
    chosen
        .into_iter()
        .map(|(i, n, candidates)| {
            let first = &tokens[i];
            let last = &tokens[i + n - 1];
            Mention {
                surface: text_in[first.bytes.0..last.bytes.1].to_string(),
                span: (first.chars.0, last.chars.1),
                candidates,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GazetteerEntry;

    pub(crate) fn entry(id: &str, name: &str, lat: f64, lon: f64, admin: u8, pop: u64) -> GazetteerEntry {
        GazetteerEntry {
            entry_id: id.into(),
            canonical_name: name.into(),
            alt_names: vec![],
            lat,
            lon,
            admin_level: admin,
            population: pop,
            country: "XX".into(),
            polygon: None,
        }
    }

    fn gaz() -> Gazetteer {
        Gazetteer::from_entries(vec![
            entry("ktm", "Kathmandu", 27.7172, 85.324, 8, 845_767),
            entry("ny", "New York", 40.7, -74.0, 4, 19_000_000),
            entry("nyc", "New York City", 40.71, -74.0, 8, 8_300_000),
            entry("york", "York", 53.96, -1.08, 8, 150_000),
        ])
        .unwrap()
    }

    #[test]
    fn single_mention_span() {
        let g = gaz();
        let text = "flooding in Kathmandu today";
        let m = extract_mentions(text, &g);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface, "Kathmandu");
        assert_eq!(m[0].span, (12, 21));
        assert_eq!(m[0].candidates[0].entry_id, "ktm");
    }

    #[test]
    fn longest_match_wins() {
        let g = gaz();
        let m = extract_mentions("water rising in New York City tonight", &g);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface, "New York City");
        assert_eq!(m[0].candidates[0].entry_id, "nyc");
    }

    #[test]
    fn no_mentions() {
        assert!(extract_mentions("nothing to see here", &gaz()).is_empty());
    }

    #[test]
    fn hashtags_and_case() {
        let g = gaz();
        let m = extract_mentions("#KATHMANDU under water; York too", &g);
        let ids: Vec<_> = m.iter().map(|m| m.candidates[0].entry_id.as_str()).collect();
        assert_eq!(ids, ["ktm", "york"]);
        assert_eq!(m[0].surface, "KATHMANDU");
    }
}
