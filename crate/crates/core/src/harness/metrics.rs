//! RMSE and the paired signed-rank test used for significance marking.

use crate::error::{Error, Result};

pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput);
    }
    if predictions.len() != truths.len() {
        return Err(Error::ShapeMismatch { expected: truths.len(), actual: predictions.len() });
    }
    let sse: f64 = predictions.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / predictions.len() as f64).sqrt())
}

/// Significance level for marking.
pub const ALPHA: f64 = 0.05;

/// Minimum paired runs for a signed-rank test.
pub const MIN_RUNS: usize = 5;

/// Exact two-sided p-value of the Wilcoxon signed-rank test on paired
/// samples. Zero differences are discarded; tied magnitudes share their
/// average rank, and the null distribution is built over those ranks, so the
/// p-value stays exact under ties. No differences gives p = 1.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch { expected: a.len(), actual: b.len() });
    }
    let mut diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Ok(1.0);
    }
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    // Doubled average ranks are integers.
    let n = diffs.len();
    let mut ranks2 = vec![0usize; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[j + 1].abs() == diffs[i].abs() {
            j += 1;
        }
        for r in &mut ranks2[i..=j] {
            *r = i + j + 2;
        }
        i = j + 1;
    }
    let observed: usize = diffs.iter().zip(&ranks2).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total: usize = ranks2.iter().sum();
    let mut dist = vec![0.0f64; total + 1];
    dist[0] = 1.0;
    for &r in &ranks2 {
        for w in (0..=total).rev() {
            let with = if w >= r { dist[w - r] } else { 0.0 };
            dist[w] = 0.5 * (dist[w] + with);
        }
    }
    let lower: f64 = dist[..=observed].iter().sum();
    let upper: f64 = dist[observed..].iter().sum();
    Ok((2.0 * lower.min(upper)).min(1.0))
}

/// Flags the lowest-mean method and every method whose paired runs are not
/// significantly different from it. `runs[m]` holds method `m`'s per-run
/// RMSEs in repeat order.
pub fn mark_significant(runs: &[Vec<f64>]) -> Result<Vec<bool>> {
    match runs {
        [] => return Ok(Vec::new()),
        [_] => return Ok(vec![true]),
        _ => {}
    }
    let k = runs[0].len();
    if let Some(bad) = runs.iter().find(|r| r.len() != k) {
        return Err(Error::ShapeMismatch { expected: k, actual: bad.len() });
    }
    if k < MIN_RUNS {
        return Err(Error::InsufficientRuns { required: MIN_RUNS, actual: k });
    }
    let mean = |r: &Vec<f64>| r.iter().sum::<f64>() / r.len() as f64;
    let best = (0..runs.len()).min_by(|&x, &y| mean(&runs[x]).total_cmp(&mean(&runs[y]))).expect("non-empty");
    runs.iter()
        .enumerate()
        .map(|(m, r)| Ok(m == best || wilcoxon_signed_rank(r, &runs[best])? >= ALPHA))
        .collect()
}
