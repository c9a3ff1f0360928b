use std::f64::consts::PI;

use flowcast_core::signal::{
    build_envelopes, count_zero_crossings, emd, envelope_knots, find_extrema, is_imf, sift_once,
    SiftConfig, SplineKind,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn random_walk(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += rng.random::<f64>() - 0.5;
            x
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Neighbour-comparison oracle for plateau-free input.
fn brute_force_extrema(v: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..v.len() - 1 {
        if v[i] > v[i - 1] && v[i] > v[i + 1] {
            maxima.push(i);
        }
        if v[i] < v[i - 1] && v[i] < v[i + 1] {
            minima.push(i);
        }
    }
    (maxima, minima)
}

/// Akima interpolation evaluated point by point: locate the interval, form
/// the five surrounding secants (extrapolated at the ends), take the Akima
/// weighted slopes at both interval ends and evaluate the cubic Hermite
/// basis. Shares no code with the library's coefficient-table spline.
fn akima_oracle(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let secant = |k: isize| -> f64 {
        let real = |k: usize| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
        let last = n as isize - 2;
        if k < 0 {
            let (d0, d1) = (real(0), real(1));
            // d_{-1} = 2 d_0 - d_1, d_{-2} = 2 d_{-1} - d_0
            let dm1 = 2.0 * d0 - d1;
            if k == -1 { dm1 } else { 2.0 * dm1 - d0 }
        } else if k > last {
            let (a, b) = (real(last as usize - 1), real(last as usize));
            let dp1 = 2.0 * b - a;
            if k == last + 1 { dp1 } else { 2.0 * dp1 - b }
        } else {
            real(k as usize)
        }
    };
    let slope_at = |i: isize| -> f64 {
        let (m0, m1, m2, m3) = (secant(i - 2), secant(i - 1), secant(i), secant(i + 1));
        let w1 = (m3 - m2).abs();
        let w2 = (m1 - m0).abs();
        if w1 + w2 == 0.0 { (m1 + m2) / 2.0 } else { (w1 * m1 + w2 * m2) / (w1 + w2) }
    };
    let mut i = 0;
    while i + 2 < n && xs[i + 1] <= x {
        i += 1;
    }
    let h = xs[i + 1] - xs[i];
    let s = (x - xs[i]) / h;
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    let (ii, jj) = (i as isize, i as isize + 1);
    h00 * ys[i] + h10 * h * slope_at(ii) + h01 * ys[i + 1] + h11 * h * slope_at(jj)
}

#[test]
fn extrema_match_brute_force_on_seed0_noise() {
    let v = uniform_noise(0, 64);
    let e = find_extrema(&v).unwrap();
    let (maxima, minima) = brute_force_extrema(&v);
    assert_eq!(e.max_indices(), maxima);
    assert_eq!(e.min_indices(), minima);
    for &(i, val) in e.maxima.iter().chain(&e.minima) {
        assert_eq!(val, v[i]);
    }
}

#[test]
fn mean_envelope_matches_independent_akima() {
    let n = 300;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (p1, p2) = (rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI);
    let v: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            (2.0 * PI * 11.0 * t / n as f64 + p1).sin() + 0.6 * (2.0 * PI * 3.0 * t / n as f64 + p2).sin()
        })
        .collect();
    let e = find_extrema(&v).unwrap();
    let cfg = SiftConfig::default();
    let env = build_envelopes(&v, &e, &cfg).unwrap();
    assert_eq!((env.upper_kind, env.lower_kind), (SplineKind::Akima, SplineKind::Akima));
    let (uk, lk) = envelope_knots(&v, &e).unwrap();
    for t in 0..n {
        let x = t as f64;
        let u = akima_oracle(&uk.xs, &uk.ys, x);
        let l = akima_oracle(&lk.xs, &lk.ys, x);
        assert!((env.upper[t] - u).abs() < 1e-9, "upper at {t}");
        assert!((env.lower[t] - l).abs() < 1e-9, "lower at {t}");
        assert!((env.mean[t] - (u + l) / 2.0).abs() < 1e-9, "mean at {t}");
    }
}

#[test]
fn sift_pure_tone_within_five_percent() {
    let amp = 3.0;
    let n = 512;
    let v: Vec<f64> = (0..n).map(|t| amp * (2.0 * PI * 8.0 * t as f64 / n as f64).sin()).collect();
    let out = sift_once(&v, &SiftConfig::default()).unwrap();
    for t in n / 4..3 * n / 4 {
        assert!((out[t] - v[t]).abs() < 0.05 * amp);
    }
}

#[test]
fn two_tone_separates_into_two_imfs() {
    let n = 512;
    let fast: Vec<f64> = (0..n).map(|t| (2.0 * PI * 8.0 * t as f64 / n as f64).sin()).collect();
    let slow: Vec<f64> = (0..n).map(|t| 0.5 * (2.0 * PI * t as f64 / n as f64).sin()).collect();
    let s: Vec<f64> = fast.iter().zip(&slow).map(|(a, b)| a + b).collect();
    let d = emd(&s, &SiftConfig::default()).unwrap();
    assert_eq!(d.imfs.len(), 2, "diagnostics: {:?}", d.diagnostics);
    let (lo, hi) = (n / 10, n - n / 10);
    assert!(pearson(&d.imfs[0][lo..hi], &fast[lo..hi]) > 0.95);
    assert!(pearson(&d.imfs[1][lo..hi], &slow[lo..hi]) > 0.95);
}

#[test]
fn random_walk_reconstructs() {
    let s = random_walk(0, 256);
    let d = emd(&s, &SiftConfig::default()).unwrap();
    assert!(d.imfs.len() >= 3);
    let scale = s.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let rec = d.reconstruct();
    for t in 0..s.len() {
        assert!((rec[t] - s[t]).abs() <= 1e-9 * scale);
    }
}

#[test]
fn accepted_imfs_satisfy_both_conditions() {
    let cfg = SiftConfig::default();
    for seed in 0..5 {
        let s = random_walk(seed, 400);
        let d = emd(&s, &cfg).unwrap();
        for (imf, diag) in d.imfs.iter().zip(&d.diagnostics.imfs) {
            if !diag.force_accepted {
                let c = is_imf(imf, &cfg);
                assert!(c.is_imf, "seed {seed}: {c:?}");
                assert!(c.extrema.abs_diff(count_zero_crossings(imf)) <= 1);
            }
        }
    }
}

#[test]
fn emd_is_bitwise_deterministic() {
    let s = random_walk(3, 300);
    let a = emd(&s, &SiftConfig::default()).unwrap();
    let b = emd(&s, &SiftConfig::default()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn telescoping_reconstruction(seed in 0u64..10_000, n in 8usize..300) {
        let s = random_walk(seed, n);
        let d = emd(&s, &SiftConfig::default()).unwrap();
        let scale = s.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let rec = d.reconstruct();
        for t in 0..n {
            prop_assert!((rec[t] - s[t]).abs() <= 1e-9 * scale);
        }
        for imf in &d.imfs {
            prop_assert_eq!(imf.len(), n);
        }
    }

    #[test]
    fn extrema_agree_with_scan(seed in 0u64..10_000, n in 3usize..200) {
        let v = uniform_noise(seed, n);
        let e = find_extrema(&v).unwrap();
        let (maxima, minima) = brute_force_extrema(&v);
        prop_assert_eq!(e.max_indices(), maxima);
        prop_assert_eq!(e.min_indices(), minima);
    }

    #[test]
    fn monotone_input_has_no_imfs(start in -100.0f64..100.0, steps in proptest::collection::vec(0.01f64..5.0, 4..60)) {
        let mut x = start;
        let s: Vec<f64> = steps.iter().map(|d| { x += d; x }).collect();
        let d = emd(&s, &SiftConfig::default()).unwrap();
        prop_assert!(d.imfs.is_empty());
        prop_assert_eq!(d.residue, s);
    }
}
