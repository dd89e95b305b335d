use chrono::{TimeZone, Utc};
use geopulse_core::media::{
    dedup, dedup_decisions, dhash, hamming, photo_score, threshold_filter, DedupDecision, Direction, HashedItem,
    LuminanceImage, PerceptualHash,
};
use proptest::prelude::*;

mod common;

/// dHash from block means, for images whose sides are multiples of the grid.
fn block_dhash(img: &LuminanceImage) -> u64 {
    let (bw, bh) = (img.width() / 9, img.height() / 8);
    let mean = |cx: u32, cy: u32| -> f64 {
        let mut s = 0u64;
        for y in cy * bh..(cy + 1) * bh {
            for x in cx * bw..(cx + 1) * bw {
                s += img.get(x, y) as u64;
            }
        }
        s as f64 / (bw * bh) as f64
    };
    let mut h = 0u64;
    for r in 0..8 {
        for c in 0..8 {
            h <<= 1;
            if mean(c, r) > mean(c + 1, r) {
                h |= 1;
            }
        }
    }
    h
}

fn image(w: u32, h: u32, px: &[u8]) -> LuminanceImage {
    LuminanceImage::new(w, h, px[..(w * h) as usize].to_vec()).unwrap()
}

proptest! {
    #[test]
    fn hamming_is_a_metric(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (PerceptualHash(a), PerceptualHash(b), PerceptualHash(c));
        prop_assert_eq!(hamming(a, a), 0);
        prop_assert_eq!(hamming(a, b), hamming(b, a));
        prop_assert!(hamming(a, c) <= hamming(a, b) + hamming(b, c));
        prop_assert_eq!(hamming(a, b), (a.0 ^ b.0).count_ones());
    }

    #[test]
    fn dhash_matches_block_means(scale in 1u32..4, px in prop::collection::vec(any::<u8>(), 9 * 8 * 9)) {
        let img = image(9 * scale, 8 * scale, &px);
        prop_assert_eq!(dhash(&img).0, block_dhash(&img));
    }

    #[test]
    fn pgm_round_trip(w in 1u32..40, h in 1u32..40, px in prop::collection::vec(any::<u8>(), 1600)) {
        let img = image(w, h, &px);
        let back = LuminanceImage::decode_pgm(&img.encode_pgm()).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn dedup_matches_oracle(
        raw in prop::collection::vec((0i64..50, prop::collection::vec(0u64..64, 1..3)), 0..40),
        max in 0u32..6,
    ) {
        // hashes drawn from a small cluster so collisions are common
        let items: Vec<(String, i64, Vec<u64>)> = raw
            .iter()
            .enumerate()
            .map(|(i, (t, hs))| (format!("p{i:03}"), *t, hs.iter().map(|h| h * 0x0101).collect()))
            .collect();
        let hashed: Vec<HashedItem> = items
            .iter()
            .map(|(id, t, hs)| HashedItem {
                id: id.clone(),
                created_at: Utc.timestamp_opt(1_600_000_000 + t, 0).unwrap(),
                hashes: Ok(hs.iter().map(|&h| PerceptualHash(h)).collect()),
            })
            .collect();
        let out = dedup(&hashed, max);
        let mut removed: Vec<String> = out.removed.iter().map(|r| r.removed_id.clone()).collect();
        let mut want = common::dedup_oracle(&items, max);
        removed.sort();
        want.sort();
        prop_assert_eq!(&removed, &want);
        for g in common::near_duplicate_groups(&items, max) {
            prop_assert!(out.kept.contains(&g[0]));
        }
        // every removal points at a kept item within range
        for r in &out.removed {
            prop_assert!(out.kept.contains(&r.matched_kept_id));
            prop_assert!(r.distance <= max);
        }
    }
}

#[test]
fn entropy_extremes() {
    let flat = LuminanceImage::from_fn(16, 16, |_, _| 90).unwrap();
    assert_eq!(photo_score(&flat), 0.0);
    let all = LuminanceImage::from_fn(16, 16, |x, y| (y * 16 + x) as u8).unwrap();
    assert_eq!(photo_score(&all), 1.0);
    let two = LuminanceImage::from_fn(16, 16, |x, _| if x < 8 { 0 } else { 255 }).unwrap();
    assert_eq!(photo_score(&two), 1.0 / 8.0);
}

#[test]
fn threshold_directions() {
    let s = [0.2, 0.5, 0.8];
    assert_eq!(threshold_filter(&s, 0.5, Direction::KeepIfGe), [false, true, true]);
    assert_eq!(threshold_filter(&s, 0.5, Direction::KeepIfLe), [true, true, false]);
}

#[test]
fn decisions_align_with_input() {
    let t = |s| Utc.timestamp_opt(s, 0).unwrap();
    let items = vec![
        HashedItem {
            id: "late".into(),
            created_at: t(10),
            hashes: Ok(vec![PerceptualHash(1)]),
        },
        HashedItem {
            id: "early".into(),
            created_at: t(0),
            hashes: Ok(vec![PerceptualHash(0)]),
        },
    ];
    let d = dedup_decisions(&items, 1);
    assert_eq!(d[1], DedupDecision::Kept);
    assert_eq!(
        d[0],
        DedupDecision::Removed {
            matched_kept_id: "early".into(),
            distance: 1
        }
    );
}

#[test]
fn corrupt_pgm_rejected() {
    assert!(LuminanceImage::decode_pgm(b"P5\n4 4\n255\n\x00\x01").is_err());
    assert!(LuminanceImage::decode_pgm(b"P6\n1 1\n255\n\x00\x00\x00").is_err());
}
