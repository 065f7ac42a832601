//! Helpers shared by the integration tests; each test binary uses a subset.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Deserialize)]
pub struct Manifest {
    pub generator: String,
    pub dtype: String,
    pub entries: Vec<Entry>,
    pub mt19937: MtCases,
}

#[derive(Deserialize)]
pub struct Entry {
    pub seed: u64,
    pub shape: Vec<usize>,
    pub file: String,
    pub sha256: String,
    pub sum: f64,
}

#[derive(Deserialize)]
pub struct MtCases {
    pub cases: Vec<MtCase>,
}

#[derive(Deserialize)]
pub struct MtCase {
    pub seed: u64,
    pub index: usize,
    pub value: u32,
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn manifest() -> Manifest {
    let text = std::fs::read_to_string(fixture_dir().join("manifest.json")).expect("manifest");
    serde_json::from_str(&text).expect("manifest json")
}

/// Two-sided p by enumerating every sign assignment, ranks computed by
/// counting.
pub fn brute_force_p(deltas: &[f64]) -> f64 {
    let d: Vec<f64> = deltas.iter().copied().filter(|&x| x != 0.0).collect();
    let n = d.len();
    // Doubled average rank: 2 * (#smaller) + (#equal) + 1.
    let rank2: Vec<i64> = d
        .iter()
        .map(|x| {
            let smaller = d.iter().filter(|y| y.abs() < x.abs()).count() as i64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as i64;
            2 * smaller + equal + 1
        })
        .collect();
    let observed: i64 = d.iter().zip(&rank2).map(|(x, r)| if *x > 0.0 { *r } else { -r }).sum();
    let mut extreme = 0u64;
    for mask in 0u32..(1 << n) {
        let w: i64 = (0..n)
            .map(|i| if mask >> i & 1 == 1 { rank2[i] } else { -rank2[i] })
            .sum();
        if w.abs() >= observed.abs() {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

pub fn random_deltas(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let coarse = rng.random_bool(0.5);
    (0..n)
        .map(|_| {
            let x: f64 = rng.random_range(-2.0..3.0);
            if coarse {
                (x * 4.0).round() / 4.0
            } else {
                x
            }
        })
        .collect()
}
