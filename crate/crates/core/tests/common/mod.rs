//! Fixtures and brute-force oracles shared by integration targets.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_walk(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += rng.random::<f64>() - 0.5;
            x
        })
        .collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// `(start, input, horizon)` of every window, by explicit index arithmetic.
pub fn brute_force_windows(v: &[f64], i: usize, t: usize, stride: usize) -> Vec<(usize, Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    let mut s = 0;
    while s + i + t <= v.len() {
        let mut x = Vec::new();
        for k in 0..i {
            x.push(v[s + k]);
        }
        let mut y = Vec::new();
        for k in 0..t {
            y.push(v[s + i + k]);
        }
        out.push((s, x, y));
        s += stride;
    }
    out
}

/// Group sums with a running accumulator.
pub fn brute_force_aggregate(v: &[f64], r: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    for (k, x) in v.iter().enumerate() {
        acc += x;
        if (k + 1) % r == 0 {
            out.push(acc);
            acc = 0.0;
        }
    }
    out
}
