use std::f64::consts::PI;

use flowcast_core::noise::{align_trials, ceemdan, eemd, sample_std, white_noise, NoiseConfig};
use flowcast_core::signal::{emd, SiftConfig};
use flowcast_core::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

fn two_tone(n: usize) -> (Vec<f64>, Vec<f64>) {
    let fast = (0..n).map(|t| (2.0 * PI * 8.0 * t as f64 / n as f64).sin()).collect();
    let slow = (0..n).map(|t| 0.5 * (2.0 * PI * t as f64 / n as f64).sin()).collect();
    (fast, slow)
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

fn peak(s: &[f64]) -> f64 {
    s.iter().fold(1.0f64, |a, v| a.max(v.abs()))
}

fn near_noiseless() -> NoiseConfig {
    NoiseConfig { trials: 1, epsilon: 1e-12, ..Default::default() }
}

#[test]
fn single_near_noiseless_trial_matches_emd() {
    let s = random_walk(0, 256);
    let sift = SiftConfig::default();
    let plain = emd(&s, &sift).unwrap();
    let e = eemd(&s, &near_noiseless(), &sift, Execution::Sequential).unwrap();
    assert_eq!(e.imfs.len(), plain.imfs.len());
    let tol = 1e-6 * peak(&s);
    for (a, b) in e.imfs.iter().zip(&plain.imfs) {
        assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol));
    }
    let c = ceemdan(&s, &near_noiseless(), &sift, Execution::Sequential).unwrap();
    assert!(c.imfs[0].iter().zip(&plain.imfs[0]).all(|(x, y)| (x - y).abs() <= tol));
}

#[test]
fn default_trial_count_and_coefficient() {
    let c = NoiseConfig::default();
    assert_eq!((c.trials, c.epsilon), (25, 0.2));
    let d = eemd(&random_walk(1, 128), &c, &SiftConfig::default(), Execution::Parallel).unwrap();
    assert_eq!(d.diagnostics.trials, 25);
}

#[test]
fn ceemdan_reconstructs_exactly() {
    let s = random_walk(0, 300);
    let d = ceemdan(&s, &NoiseConfig::default(), &SiftConfig::default(), Execution::Parallel).unwrap();
    assert!(!d.imfs.is_empty());
    let rec = d.reconstruct();
    let tol = 1e-9 * peak(&s);
    assert!(rec.iter().zip(&s).all(|(r, v)| (r - v).abs() <= tol));
}

#[test]
fn eemd_residue_closes_the_sum() {
    let s = random_walk(2, 200);
    let d = eemd(&s, &NoiseConfig::default(), &SiftConfig::default(), Execution::Parallel).unwrap();
    let tol = 1e-9 * peak(&s);
    assert!(d.reconstruct().iter().zip(&s).all(|(r, v)| (r - v).abs() <= tol));
}

#[test]
fn monotone_ramp_has_no_ceemdan_modes() {
    let s: Vec<f64> = (0..64).map(|t| 0.5 * t as f64 + 3.0).collect();
    let d = ceemdan(&s, &NoiseConfig::default(), &SiftConfig::default(), Execution::Parallel).unwrap();
    assert!(d.imfs.is_empty());
    assert_eq!(d.residue, s);
}

#[test]
fn results_do_not_depend_on_execution_mode() {
    let s = random_walk(4, 180);
    let nc = NoiseConfig { trials: 8, seed: 11, ..Default::default() };
    let sift = SiftConfig::default();
    assert_eq!(
        eemd(&s, &nc, &sift, Execution::Sequential).unwrap(),
        eemd(&s, &nc, &sift, Execution::Parallel).unwrap()
    );
    assert_eq!(
        ceemdan(&s, &nc, &sift, Execution::Sequential).unwrap(),
        ceemdan(&s, &nc, &sift, Execution::Parallel).unwrap()
    );
}

#[test]
fn aligned_mean_equals_direct_ensemble_mean() {
    let s = random_walk(5, 150);
    let sift = SiftConfig::default();
    let nc = NoiseConfig { trials: 6, seed: 2, ..Default::default() };
    let amp = nc.epsilon * sample_std(&s);
    let trials: Vec<Vec<Vec<f64>>> = (0..nc.trials)
        .map(|k| {
            let w = white_noise(nc.seed, k, s.len());
            let x: Vec<f64> = s.iter().zip(&w).map(|(a, b)| a + amp * b).collect();
            emd(&x, &sift).unwrap().imfs
        })
        .collect();
    let modes = trials.iter().map(Vec::len).max().unwrap();
    // Direct sum over trials; a missing mode contributes nothing but K stays
    // in the denominator.
    let direct: Vec<Vec<f64>> = (0..modes)
        .map(|m| {
            (0..s.len())
                .map(|t| trials.iter().filter_map(|tr| tr.get(m)).map(|imf| imf[t]).sum::<f64>() / nc.trials as f64)
                .collect()
        })
        .collect();
    let matrix = align_trials(&trials).mean();
    let d = eemd(&s, &nc, &sift, Execution::Parallel).unwrap();
    for m in 0..modes {
        for t in 0..s.len() {
            assert!((matrix[m][t] - direct[m][t]).abs() < 1e-12);
            assert_eq!(d.imfs[m][t], matrix[m][t]);
        }
    }
}

#[test]
fn ensemble_noise_error_shrinks_with_trials() {
    let n = 512;
    let medians: Vec<f64> = [1usize, 5, 25]
        .iter()
        .map(|&k| {
            let mut errs: Vec<f64> = (0..10u64)
                .map(|seed| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let (p1, p2) = (rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI);
                    let s: Vec<f64> = (0..n)
                        .map(|t| {
                            let t = t as f64 / n as f64;
                            (2.0 * PI * 8.0 * t + p1).sin() + 0.5 * (2.0 * PI * 2.0 * t + p2).sin()
                        })
                        .collect();
                    let nc = NoiseConfig { trials: k, seed: 100 + seed, ..Default::default() };
                    let d = eemd(&s, &nc, &SiftConfig::default(), Execution::Parallel).unwrap();
                    (0..n)
                        .map(|t| (s[t] - d.imfs.iter().map(|m| m[t]).sum::<f64>()).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            (errs[4] + errs[5]) / 2.0
        })
        .collect();
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}

#[test]
fn injected_noise_is_zero_mean() {
    let (n, eps, sigma) = (512, 0.2, 0.8);
    for k in [10usize, 25] {
        let bound = 3.0 * eps * sigma / (k as f64).sqrt();
        let noise: Vec<Vec<f64>> = (0..k).map(|i| white_noise(3, i, n)).collect();
        let means: Vec<f64> = (0..n).map(|t| noise.iter().map(|w| eps * sigma * w[t]).sum::<f64>() / k as f64).collect();
        // The bound is three standard deviations of each per-sample mean, so
        // about 0.27% of samples fall outside it by chance.
        let inside = means.iter().filter(|m| m.abs() <= bound).count();
        assert!(inside as f64 >= 0.99 * n as f64, "K={k}: {inside}/{n}");
        assert!(means.iter().all(|m| m.abs() <= 1.5 * bound));
    }
}

/// At the default coefficient the leading modes carry averaged noise; the
/// fast tone appears intact as a later mode.
#[test]
fn two_tone_fast_component_survives_noise() {
    let n = 512;
    let (fast, slow) = two_tone(n);
    let s: Vec<f64> = fast.iter().zip(&slow).map(|(a, b)| a + b).collect();
    let (lo, hi) = (n / 10, n - n / 10);
    for seed in [0, 1] {
        let nc = NoiseConfig { seed, ..Default::default() };
        for d in [
            eemd(&s, &nc, &SiftConfig::default(), Execution::Parallel).unwrap(),
            ceemdan(&s, &nc, &SiftConfig::default(), Execution::Parallel).unwrap(),
        ] {
            let best = d.imfs.iter().map(|m| pearson(&m[lo..hi], &fast[lo..hi])).fold(f64::MIN, f64::max);
            assert!(best > 0.95, "{:?} seed {seed}: {best}", d.method);
            assert!(pearson(&d.imfs[0][lo..hi], &fast[lo..hi]).abs() < 0.5);
        }
    }
}
