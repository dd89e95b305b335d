//! Reference implementations used as test oracles. Written from the
//! definitions, deliberately without calling the library's search code.

#![allow(dead_code)]

use std::collections::HashMap;

use geopulse_core::model::GazetteerEntry;

pub const R_KM: f64 = 6371.0;
pub const HALF_CIRCUMFERENCE_KM: f64 = 20015.09;

pub fn great_circle_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let a = ((p2 - p1) / 2.0).sin().powi(2)
        + p1.cos() * p2.cos() * ((lon2 - lon1).to_radians() / 2.0).sin().powi(2);
    2.0 * R_KM * a.sqrt().min(1.0).asin()
}

pub fn assignment_objective(chosen: &[&GazetteerEntry], alpha: f64, beta: f64) -> f64 {
    let m = chosen.len();
    let mut pairs = 0.0;
    let mut n_pairs = 0usize;
    for i in 0..m {
        for j in i + 1..m {
            pairs += great_circle_km(chosen[i].lat, chosen[i].lon, chosen[j].lat, chosen[j].lon)
                / HALF_CIRCUMFERENCE_KM;
            n_pairs += 1;
        }
    }
    let dist = if n_pairs == 0 { 0.0 } else { pairs / n_pairs as f64 };
    let spec: f64 = chosen.iter().map(|e| (10.0 - e.admin_level as f64) / 9.0).sum::<f64>() / m as f64;
    alpha * dist + beta * spec
}

/// Enumerates every assignment and applies the documented ordering:
/// lowest objective (ties within 1e-12), then largest total population,
/// then smallest sorted id list, then smallest id sequence.
pub fn brute_disambiguate<'g>(
    candidates: &[Vec<&'g GazetteerEntry>],
    alpha: f64,
    beta: f64,
) -> (Vec<&'g GazetteerEntry>, f64) {
    let mut all: Vec<Vec<&GazetteerEntry>> = vec![vec![]];
    for cands in candidates {
        all = all
            .into_iter()
            .flat_map(|prefix| {
                cands.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(*c);
                    p
                })
            })
            .collect();
    }
    let key = |a: &Vec<&GazetteerEntry>| {
        let pop: u64 = a.iter().map(|e| e.population).sum();
        let mut sorted: Vec<String> = a.iter().map(|e| e.entry_id.clone()).collect();
        sorted.sort();
        let seq: Vec<String> = a.iter().map(|e| e.entry_id.clone()).collect();
        (pop, sorted, seq)
    };
    let mut best = all[0].clone();
    let mut best_j = assignment_objective(&best, alpha, beta);
    for a in all.into_iter().skip(1) {
        let j = assignment_objective(&a, alpha, beta);
        let better = if (j - best_j).abs() > 1e-12 {
            j < best_j
        } else {
            let (pa, sa, qa) = key(&a);
            let (pb, sb, qb) = key(&best);
            (std::cmp::Reverse(pa), sa, qa) < (std::cmp::Reverse(pb), sb, qb)
        };
        if better {
            best_j = j;
            best = a;
        }
    }
    (best, best_j)
}

/// Items as `(id, created_secs, hashes)`. Returns the ids removed when
/// items are visited by `(time, id)` and one is dropped iff any of its
/// hashes is within `max` bits of a hash of an earlier survivor.
pub fn dedup_oracle(items: &[(String, i64, Vec<u64>)], max: u32) -> Vec<String> {
    let n = items.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (items[a].1, &items[a].0).cmp(&(items[b].1, &items[b].0)));
    // all-pairs closeness matrix
    let mut close = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            close[i][j] = items[i]
                .2
                .iter()
                .any(|a| items[j].2.iter().any(|b| (a ^ b).count_ones() <= max));
        }
    }
    let mut survivors: Vec<usize> = Vec::new();
    let mut removed = Vec::new();
    for &i in &order {
        if survivors.iter().any(|&s| close[i][s]) {
            removed.push(items[i].0.clone());
        } else {
            survivors.push(i);
        }
    }
    removed
}

/// Connected components of the closeness graph, each sorted by `(time, id)`.
pub fn near_duplicate_groups(items: &[(String, i64, Vec<u64>)], max: u32) -> Vec<Vec<String>> {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let near = items[i]
                .2
                .iter()
                .any(|a| items[j].2.iter().any(|b| (a ^ b).count_ones() <= max));
            if near {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<String>> = groups
        .into_values()
        .map(|mut g| {
            g.sort_by(|&a, &b| (items[a].1, &items[a].0).cmp(&(items[b].1, &items[b].0)));
            g.into_iter().map(|i| items[i].0.clone()).collect()
        })
        .collect();
    out.sort();
    out
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn chain_cost(order: &[usize], c: &[f64], s: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..order.len() {
        let reach: f64 = order[..i].iter().map(|&j| s[j]).product();
        total += c[order[i]] * reach;
    }
    total
}

/// Mean binary cross-entropy of a logistic model plus `l2/2 ||w||^2`;
/// `params` holds weights then bias.
pub fn logistic_objective(params: &[f64], x: &[Vec<f64>], y: &[f64], l2: f64) -> f64 {
    let d = params.len() - 1;
    let mut total = 0.0;
    for (row, &t) in x.iter().zip(y) {
        let z: f64 = params[d] + row.iter().zip(params).map(|(a, b)| a * b).sum::<f64>();
        let p = 1.0 / (1.0 + (-z).exp());
        total -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
    }
    let reg: f64 = params[..d].iter().map(|w| w * w).sum();
    total / x.len() as f64 + 0.5 * l2 * reg
}

/// Pearson on tie-averaged ranks, ranks assigned by counting.
pub fn spearman_by_hand(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
