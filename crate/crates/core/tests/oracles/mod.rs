//! Brute-force reference implementations used to check the library. None of
//! these call into the code paths they verify.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn read_gz(name: &str) -> String {
    let file = std::fs::File::open(data_path(name)).unwrap();
    let mut text = String::new();
    flate2::read::GzDecoder::new(file).read_to_string(&mut text).unwrap();
    text
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc.sqrt()
}

/// All neurons sorted by distance to `x`; equal distances keep index order.
pub fn ranked(x: &[f64], codebook: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = codebook.iter().enumerate().map(|(j, w)| (j, distance(x, w))).collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all
}

pub fn quantization_error(samples: &[Vec<f64>], codebook: &[Vec<f64>]) -> f64 {
    samples.iter().map(|x| ranked(x, codebook)[0].1).sum::<f64>() / samples.len() as f64
}

pub fn topographic_error(samples: &[Vec<f64>], codebook: &[Vec<f64>], side: usize) -> f64 {
    let bad = samples
        .iter()
        .filter(|x| {
            let r = ranked(x, codebook);
            let (a, b) = (r[0].0, r[1].0);
            let (ar, ac) = ((a / side) as i64, (a % side) as i64);
            let (br, bc) = ((b / side) as i64, (b % side) as i64);
            (ar - br).abs() > 1 || (ac - bc).abs() > 1
        })
        .count();
    bad as f64 / samples.len() as f64
}

pub fn u_matrix(codebook: &[Vec<f64>], side: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for r in 0..side as i64 {
        for c in 0..side as i64 {
            let me = &codebook[(r * side as i64 + c) as usize];
            let mut ds = Vec::new();
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    if (dr, dc) == (0, 0) || nr < 0 || nc < 0 || nr >= side as i64 || nc >= side as i64 {
                        continue;
                    }
                    ds.push(distance(me, &codebook[(nr * side as i64 + nc) as usize]));
                }
            }
            out.push(if ds.is_empty() { 0.0 } else { ds.iter().sum::<f64>() / ds.len() as f64 });
        }
    }
    out
}

/// Cutoff-free online update of every neuron.
pub fn full_update(codebook: &mut [Vec<f64>], side: usize, x: &[f64], alpha: f64, sigma: f64) {
    let bmu = ranked(x, codebook)[0].0;
    let (br, bc) = ((bmu / side) as f64, (bmu % side) as f64);
    for (j, w) in codebook.iter_mut().enumerate() {
        let (r, c) = ((j / side) as f64, (j % side) as f64);
        let d2 = (r - br).powi(2) + (c - bc).powi(2);
        let h = (-d2 / (2.0 * sigma * sigma)).exp();
        for i in 0..x.len() {
            w[i] += alpha * h * (x[i] - w[i]);
        }
    }
}

pub fn min_max_normalize(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = rows[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for r in rows {
        for i in 0..dim {
            lo[i] = lo[i].min(r[i]);
            hi[i] = hi[i].max(r[i]);
        }
    }
    rows.iter()
        .map(|r| {
            (0..dim)
                .map(|i| if hi[i] == lo[i] { 0.0 } else { (r[i] - lo[i]) / (hi[i] - lo[i]) })
                .collect()
        })
        .collect()
}

/// Lloyd's k-means with `restarts` random initializations; returns the
/// lowest-inertia cluster assignment.
pub fn kmeans(rows: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts {
        let mut centers: Vec<Vec<f64>> = Vec::new();
        while centers.len() < k {
            let c = rows[rng.random_range(0..rows.len())].clone();
            if !centers.contains(&c) {
                centers.push(c);
            }
        }
        let mut assign = vec![usize::MAX; rows.len()];
        for _ in 0..300 {
            let next: Vec<usize> = rows.iter().map(|x| ranked(x, &centers)[0].0).collect();
            if next == assign {
                break;
            }
            assign = next;
            for (c, center) in centers.iter_mut().enumerate() {
                let members: Vec<&Vec<f64>> = rows.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(r, _)| r).collect();
                if members.is_empty() {
                    continue;
                }
                for i in 0..center.len() {
                    center[i] = members.iter().map(|m| m[i]).sum::<f64>() / members.len() as f64;
                }
            }
        }
        let inertia: f64 = rows.iter().zip(&assign).map(|(x, &a)| distance(x, &centers[a]).powi(2)).sum();
        if best.as_ref().map_or(true, |(b, _)| inertia < *b) {
            best = Some((inertia, assign));
        }
    }
    best.unwrap().1
}

/// Sum over groups of the majority-label count, divided by the sample count.
pub fn purity(groups: &[usize], labels: &[String]) -> f64 {
    let mut counts: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    for (g, l) in groups.iter().zip(labels) {
        *counts.entry(*g).or_default().entry(l.as_str()).or_default() += 1;
    }
    let majority: usize = counts.values().map(|m| *m.values().max().unwrap()).sum();
    majority as f64 / labels.len() as f64
}

/// Mean codebook distance over 4-neighbor pairs and over all pairs.
pub fn adjacent_vs_all_pairs(codebook: &[Vec<f64>], side: usize) -> (f64, f64) {
    let (mut adj, mut adj_n, mut all, mut all_n) = (0.0, 0usize, 0.0, 0usize);
    for a in 0..codebook.len() {
        for b in a + 1..codebook.len() {
            let d = distance(&codebook[a], &codebook[b]);
            all += d;
            all_n += 1;
            let (ar, ac, br, bc) = (a / side, a % side, b / side, b % side);
            if ar.abs_diff(br) + ac.abs_diff(bc) == 1 {
                adj += d;
                adj_n += 1;
            }
        }
    }
    (adj / adj_n as f64, all / all_n as f64)
}

pub fn relative_close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(f64::MIN_POSITIVE) || got == want
}
