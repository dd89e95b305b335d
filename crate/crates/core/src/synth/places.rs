//! Bundled reference places (approximate real coordinates).

use crate::model::GazetteerEntry;

/// id, canonical name, alt names (`|`-separated), lat, lon, admin level,
/// population, country.
type Row = (&'static str, &'static str, &'static str, f64, f64, u8, u64, &'static str);

const PLACES: &[Row] = &[
    ("np", "Nepal", "", 28.3949, 84.1240, 2, 29_136_808, "NP"),
    ("np-bagmati", "Bagmati", "Bagmati Province", 27.6000, 85.4000, 4, 6_084_042, "NP"),
    ("np-gandaki", "Gandaki", "Gandaki Province", 28.3000, 84.0000, 4, 2_479_745, "NP"),
    ("np-koshi", "Koshi", "Koshi Province", 27.0000, 87.3000, 4, 4_972_021, "NP"),
    ("np-lumbini", "Lumbini", "Lumbini Province", 27.9000, 83.0000, 4, 5_124_225, "NP"),
    ("np-karnali", "Karnali", "Karnali Province", 29.0000, 82.2000, 4, 1_694_889, "NP"),
    ("np-sudurpashchim", "Sudurpashchim", "Far West", 29.2000, 80.9000, 4, 2_711_270, "NP"),
    ("np-madhesh", "Madhesh", "Madhesh Province", 26.9000, 85.9000, 4, 6_126_288, "NP"),
    ("np-kathmandu", "Kathmandu", "Kathmandu Valley|KTM", 27.7172, 85.3240, 8, 845_767, "NP"),
    ("np-lalitpur", "Lalitpur", "Patan", 27.6644, 85.3188, 8, 284_922, "NP"),
    ("np-bhaktapur", "Bhaktapur", "", 27.6710, 85.4298, 8, 81_748, "NP"),
    ("np-pokhara", "Pokhara", "", 28.2096, 83.9856, 8, 414_141, "NP"),
    ("np-bharatpur", "Bharatpur", "", 27.6833, 84.4333, 8, 280_502, "NP"),
    ("np-biratnagar", "Biratnagar", "", 26.4525, 87.2718, 8, 242_548, "NP"),
    ("np-birgunj", "Birgunj", "", 27.0104, 84.8770, 8, 204_816, "NP"),
    ("np-dharan", "Dharan", "", 26.8125, 87.2836, 8, 141_439, "NP"),
    ("np-butwal", "Butwal", "", 27.7006, 83.4484, 8, 118_462, "NP"),
    ("np-hetauda", "Hetauda", "", 27.4284, 85.0322, 8, 152_875, "NP"),
    ("np-janakpur", "Janakpur", "Janakpurdham", 26.7288, 85.9266, 8, 173_924, "NP"),
    ("np-nepalgunj", "Nepalgunj", "", 28.0500, 81.6167, 8, 138_951, "NP"),
    ("np-dhangadhi", "Dhangadhi", "", 28.6940, 80.5930, 8, 147_741, "NP"),
    ("np-mahendranagar", "Mahendranagar", "Bhimdatta", 28.9646, 80.1812, 8, 104_599, "NP"),
    ("np-itahari", "Itahari", "", 26.6646, 87.2718, 8, 140_517, "NP"),
    ("np-tulsipur", "Tulsipur", "", 28.1307, 82.2973, 8, 141_528, "NP"),
    ("np-ghorahi", "Ghorahi", "", 28.0333, 82.4833, 8, 156_164, "NP"),
    ("np-birendranagar", "Birendranagar", "Surkhet", 28.6019, 81.6339, 8, 100_458, "NP"),
    ("np-siddharthanagar", "Siddharthanagar", "Bhairahawa", 27.5000, 83.4500, 8, 63_483, "NP"),
    ("np-gorkha", "Gorkha", "", 28.0000, 84.6333, 8, 49_272, "NP"),
    ("np-ilam", "Ilam", "", 26.9094, 87.9282, 8, 48_536, "NP"),
    ("np-damak", "Damak", "", 26.6598, 87.7000, 8, 75_102, "NP"),
    ("np-dhankuta", "Dhankuta", "", 26.9833, 87.3333, 8, 31_533, "NP"),
    ("np-jumla", "Jumla", "Chandannath", 29.2747, 82.1838, 8, 29_571, "NP"),
    ("np-baglung", "Baglung", "", 28.2667, 83.6000, 8, 58_218, "NP"),
    ("np-tansen", "Tansen", "", 27.8667, 83.5500, 8, 29_095, "NP"),
    ("np-besisahar", "Besisahar", "", 28.2333, 84.3833, 8, 26_164, "NP"),
    ("np-chautara", "Chautara", "", 27.7833, 85.7167, 8, 23_342, "NP"),
    ("np-dhulikhel", "Dhulikhel", "", 27.6167, 85.5500, 8, 32_669, "NP"),
    ("np-rajbiraj", "Rajbiraj", "", 26.5333, 86.7500, 8, 71_877, "NP"),
    ("np-lahan", "Lahan", "", 26.7167, 86.4833, 8, 91_766, "NP"),
    ("np-gaur", "Gaur", "", 26.7667, 85.2667, 8, 45_346, "NP"),
    ("np-dipayal", "Dipayal", "Silgadhi", 29.2667, 80.9333, 8, 32_941, "NP"),
    ("np-dadeldhura", "Dadeldhura", "Amargadhi", 29.3000, 80.5833, 8, 25_122, "NP"),
    ("np-charikot", "Charikot", "", 27.6667, 86.0333, 8, 20_748, "NP"),
    ("np-salleri", "Salleri", "", 27.5000, 86.5833, 8, 12_000, "NP"),
    ("th", "Thailand", "", 15.8700, 100.9925, 2, 69_950_850, "TH"),
    ("th-bangkok", "Bangkok", "Krung Thep", 13.7563, 100.5018, 8, 10_539_000, "TH"),
    ("th-chiang-mai", "Chiang Mai", "", 18.7883, 98.9853, 8, 127_240, "TH"),
    ("th-ayutthaya", "Ayutthaya", "", 14.3532, 100.5689, 8, 52_952, "TH"),
    ("th-nakhon-sawan", "Nakhon Sawan", "", 15.7047, 100.1372, 8, 83_492, "TH"),
    ("th-hat-yai", "Hat Yai", "", 7.0086, 100.4747, 8, 157_359, "TH"),
    ("th-ubon", "Ubon Ratchathani", "Ubon", 15.2287, 104.8564, 8, 79_023, "TH"),
    ("th-khon-kaen", "Khon Kaen", "", 16.4419, 102.8360, 8, 114_459, "TH"),
    ("th-phitsanulok", "Phitsanulok", "", 16.8211, 100.2659, 8, 70_871, "TH"),
    ("th-sukhothai", "Sukhothai", "", 17.0078, 99.8230, 8, 36_478, "TH"),
    ("th-surat-thani", "Surat Thani", "", 9.1382, 99.3215, 8, 130_658, "TH"),
    ("in-lalitpur", "Lalitpur", "", 24.6900, 78.4100, 6, 133_305, "IN"),
    ("in-bharatpur", "Bharatpur", "", 27.2152, 77.4930, 8, 252_838, "IN"),
    ("fr", "France", "", 46.2276, 2.2137, 2, 67_750_000, "FR"),
    ("fr-paris", "Paris", "", 48.8566, 2.3522, 8, 2_102_650, "FR"),
    ("us-paris-tx", "Paris", "paris, tx", 33.6609, -95.5555, 8, 24_476, "US"),
];

pub fn all() -> Vec<GazetteerEntry> {
    PLACES
        .iter()
        .map(|&(id, name, alts, lat, lon, admin, pop, country)| GazetteerEntry {
            entry_id: id.into(),
            canonical_name: name.into(),
            alt_names: alts.split('|').filter(|s| !s.is_empty()).map(String::from).collect(),
            lat,
            lon,
            admin_level: admin,
            population: pop,
            country: country.into(),
            polygon: None,
        })
        .collect()
}

/// Entries of the given countries plus every entry sharing a name with one
/// of them (ambiguity distractors), in bundled order.
pub fn subset(countries: &[String]) -> Vec<GazetteerEntry> {
    let all = all();
    let keys = |e: &GazetteerEntry| -> Vec<String> {
        std::iter::once(&e.canonical_name)
            .chain(&e.alt_names)
            .filter_map(|n| crate::text::name_key(n))
            .collect()
    };
    let core_keys: Vec<String> = all
        .iter()
        .filter(|e| countries.contains(&e.country))
        .flat_map(keys)
        .collect();
    all.iter()
        .filter(|e| countries.contains(&e.country) || keys(e).iter().any(|k| core_keys.contains(k)))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_gazetteer_is_valid() {
        let g = crate::ingest::Gazetteer::from_entries(all()).unwrap();
        assert_eq!(g.lookup("lalitpur").len(), 2);
        assert_eq!(g.lookup("PARIS, TX").len(), 1);
    }

    #[test]
    fn subset_adds_distractors() {
        let s = subset(&["NP".into()]);
        assert!(s.iter().any(|e| e.entry_id == "in-lalitpur"));
        assert!(s.iter().any(|e| e.entry_id == "in-bharatpur"));
        assert!(!s.iter().any(|e| e.country == "TH" || e.country == "FR"));
    }
}
