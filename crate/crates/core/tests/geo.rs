use geopulse_core::geo::{
    density_filter, disambiguate, extract_mentions, geometry_filter, haversine, resolve_post, Method, Mention,
    Provenance, Weights,
};
use geopulse_core::ingest::Gazetteer;
use geopulse_core::model::{GazetteerEntry, GeoPoint, Post, Region};
use geopulse_core::wkt::Polygon;
use proptest::prelude::*;

mod common;

fn entry(id: &str, name: &str, lat: f64, lon: f64, admin: u8, pop: u64) -> GazetteerEntry {
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

fn post(id: &str, text: &str) -> Post {
    Post {
        id: id.into(),
        created_at: geopulse_core::model::parse_utc("2021-06-01T00:00:00Z").unwrap(),
        lang: "en".into(),
        text: text.into(),
        media: vec![],
        native_geo: None,
        is_repost: false,
    }
}

#[test]
fn analytic_distances() {
    let q = haversine(GeoPoint::new(0.0, 0.0), GeoPoint::new(90.0, 0.0));
    assert!((q - 10007.54).abs() < 0.01, "{q}");
    let a = haversine(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 180.0));
    assert!((a - 20015.09).abs() < 0.01, "{a}");
    assert_eq!(haversine(GeoPoint::new(27.7, 85.3), GeoPoint::new(27.7, 85.3)), 0.0);
}

proptest! {
    #[test]
    fn haversine_symmetric_and_bounded(a in -90.0f64..90.0, b in -180.0f64..180.0, c in -90.0f64..90.0, d in -180.0f64..180.0) {
        let x = haversine(GeoPoint::new(a, b), GeoPoint::new(c, d));
        let y = haversine(GeoPoint::new(c, d), GeoPoint::new(a, b));
        prop_assert!((x - y).abs() < 1e-9);
        prop_assert!((0.0..=20015.09).contains(&x));
        prop_assert!((x - common::great_circle_km(a, b, c, d)).abs() < 1e-9);
    }

    #[test]
    fn exhaustive_matches_enumeration(
        cands in prop::collection::vec(
            prop::collection::vec((-60.0f64..60.0, -170.0f64..170.0, 1u8..=10, 0u64..5), 1..=5),
            1..=4,
        ),
        alpha in 0.0f64..3.0,
        beta in 0.0f64..3.0,
    ) {
        let entries: Vec<Vec<GazetteerEntry>> = cands
            .iter()
            .enumerate()
            .map(|(m, cs)| {
                cs.iter()
                    .enumerate()
                    .map(|(k, &(lat, lon, admin, pop))| entry(&format!("m{m}c{k}"), "x", lat, lon, admin, pop))
                    .collect()
            })
            .collect();
        let refs: Vec<Vec<&GazetteerEntry>> = entries.iter().map(|v| v.iter().collect()).collect();
        let mentions: Vec<Mention> = refs
            .iter()
            .map(|c| Mention { surface: "x".into(), span: (0, 1), candidates: c.clone() })
            .collect();
        let w = Weights { alpha, beta };
        let got = disambiguate(&mentions, &w).unwrap();
        let (want, want_j) = common::brute_disambiguate(&refs, alpha, beta);
        prop_assert_eq!(got.method, Method::Exhaustive);
        let ids = |v: &[&GazetteerEntry]| v.iter().map(|e| e.entry_id.clone()).collect::<Vec<_>>();
        prop_assert_eq!(ids(&got.chosen), ids(&want));
        prop_assert!((got.objective - want_j).abs() <= 1e-9);
    }

    #[test]
    fn density_matches_brute_force(pts in prop::collection::vec((20.0f64..30.0, 80.0f64..90.0), 0..60), eps in 10.0f64..200.0, min_pts in 1usize..5) {
        let points: Vec<GeoPoint> = pts.iter().map(|&(a, b)| GeoPoint::new(a, b)).collect();
        let got = density_filter(&points, eps, min_pts);
        for (i, p) in points.iter().enumerate() {
            let n = points.iter().filter(|q| common::great_circle_km(p.lat, p.lon, q.lat, q.lon) <= eps).count();
            prop_assert_eq!(got[i], n >= min_pts);
        }
    }
}

#[test]
fn mentions_prefer_longest_match() {
    let g = Gazetteer::from_entries(vec![
        entry("york", "York", 53.96, -1.08, 8, 200_000),
        entry("ny", "New York", 40.71, -74.0, 8, 8_000_000),
    ])
    .unwrap();
    let ms = extract_mentions("Flooding in New York tonight", &g);
    assert_eq!(ms.len(), 1);
    assert_eq!(ms[0].surface, "New York");
    assert_eq!(ms[0].candidates[0].entry_id, "ny");
}

#[test]
fn context_resolves_ambiguous_name() {
    let g = Gazetteer::from_entries(geopulse_core::synth::bundled_gazetteer()).unwrap();
    let r = resolve_post(&post("p", "Water rising in Lalitpur, Nepal"), &g, &Weights::default()).unwrap();
    let lalitpur = r.places.iter().find(|p| p.surface.as_deref() == Some("Lalitpur")).unwrap();
    assert!(lalitpur.entry_id.as_deref().unwrap().starts_with("np-"), "{:?}", lalitpur.entry_id);
    assert!(resolve_post(&post("q", "nothing to see here"), &g, &Weights::default()).is_none());
}

#[test]
fn native_geotag_wins() {
    let g = Gazetteer::from_entries(geopulse_core::synth::bundled_gazetteer()).unwrap();
    let mut p = post("p", "Kathmandu");
    p.native_geo = Some(GeoPoint::new(1.0, 2.0));
    let r = resolve_post(&p, &g, &Weights::default()).unwrap();
    assert_eq!(r.method, Method::Native);
    assert_eq!(r.primary().provenance, Provenance::Native);
}

#[test]
fn geometry_keeps_inside_only() {
    let g = Gazetteer::from_entries(vec![entry("a", "Alpha", 0.5, 0.5, 8, 1), entry("b", "Beta", 5.0, 5.0, 8, 1)]).unwrap();
    let w = Weights::default();
    let rs = vec![
        resolve_post(&post("1", "Alpha"), &g, &w).unwrap(),
        resolve_post(&post("2", "Beta"), &g, &w).unwrap(),
    ];
    let region = Region {
        region_id: "r".into(),
        name: "r".into(),
        polygon: Polygon::rect(0.0, 0.0, 1.0, 1.0),
        population: 1,
    };
    assert_eq!(geometry_filter(&rs, &[region]).keep, [true, false]);
    let none = geometry_filter(&rs, &[]);
    assert_eq!(none.keep, [false, false]);
    assert_eq!(none.warnings.len(), 1);
}
