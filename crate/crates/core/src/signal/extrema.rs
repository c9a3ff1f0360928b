use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interior local maxima and minima as `(index, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtremaSet {
    pub maxima: Vec<(usize, f64)>,
    pub minima: Vec<(usize, f64)>,
}

impl ExtremaSet {
    pub fn total(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }

    pub fn max_indices(&self) -> Vec<usize> {
        self.maxima.iter().map(|&(i, _)| i).collect()
    }

    pub fn min_indices(&self) -> Vec<usize> {
        self.minima.iter().map(|&(i, _)| i).collect()
    }
}

/// Strict interior extrema. A flat run bounded on both sides by lower
/// (higher) samples is one maximum (minimum) located at the run's middle
/// index. Runs touching either end of the series are never extrema.
pub fn find_extrema(values: &[f64]) -> Result<ExtremaSet> {
    if values.len() < 3 {
        return Err(Error::SeriesTooShort { required: 3, actual: values.len() });
    }
    Ok(scan_extrema(values))
}

/// Like [`find_extrema`] but returns an empty set for short input.
pub(crate) fn scan_extrema(values: &[f64]) -> ExtremaSet {
    let n = values.len();
    let mut out = ExtremaSet::default();
    if n < 3 {
        return out;
    }
    let mut i = 1;
    while i < n - 1 {
        let v = values[i];
        let left = values[i - 1];
        let mut j = i;
        while j + 1 < n && values[j + 1] == v {
            j += 1;
        }
        if j + 1 >= n {
            break;
        }
        let right = values[j + 1];
        let mid = (i + j) / 2;
        if v > left && v > right {
            out.maxima.push((mid, v));
        } else if v < left && v < right {
            out.minima.push((mid, v));
        }
        i = j + 1;
    }
    out
}

/// Sign changes between consecutive nonzero samples. A run of exact zeros
/// between samples of opposite sign counts once; zeros between samples of
/// the same sign count zero times.
pub fn count_zero_crossings(values: &[f64]) -> usize {
    let mut last_sign = 0.0f64;
    let mut count = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            count += 1;
        }
        last_sign = s;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_wave() {
        let e = find_extrema(&[0.0, 1.0, 0.0, -1.0, 0.0]).unwrap();
        assert_eq!(e.maxima, vec![(1, 1.0)]);
        assert_eq!(e.minima, vec![(3, -1.0)]);
    }

    #[test]
    fn monotone_has_none() {
        let e = find_extrema(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(e.total(), 0);
    }

    #[test]
    fn plateau_uses_middle_index() {
        let e = find_extrema(&[0.0, 2.0, 2.0, 2.0, 0.0, -1.0, -1.0, 0.0]).unwrap();
        assert_eq!(e.maxima, vec![(2, 2.0)]);
        assert_eq!(e.minima, vec![(5, -1.0)]);
    }

    #[test]
    fn boundary_plateau_and_shoulder_ignored() {
        // leading plateau touches the start; 1,2,2,3 is a shoulder
        let e = find_extrema(&[5.0, 5.0, 1.0, 2.0, 2.0, 3.0, 3.0]).unwrap();
        assert_eq!(e.maxima, vec![]);
        assert_eq!(e.minima, vec![(2, 1.0)]);
    }

    #[test]
    fn too_short() {
        assert!(matches!(find_extrema(&[1.0, 2.0]), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn zero_crossing_rules() {
        assert_eq!(count_zero_crossings(&[1.0, -1.0, 1.0, -1.0]), 3);
        assert_eq!(count_zero_crossings(&[1.0, 0.0, -1.0]), 1);
        assert_eq!(count_zero_crossings(&[1.0, 0.0, 0.0, 1.0]), 0);
        assert_eq!(count_zero_crossings(&[0.0, 0.0]), 0);
        assert_eq!(count_zero_crossings(&[]), 0);
    }

    #[test]
    fn sampled_sine_two_periods() {
        // sin(4πt/64), t = 0..63: the sample at t = 0 is exactly zero and the
        // remaining analytic roots inside the window are t = 16, 32, 48.
        let v: Vec<f64> = (0..64)
            .map(|t| (2.0 * std::f64::consts::PI * 2.0 * t as f64 / 64.0).sin())
            .collect();
        let interior_roots = (1..64).filter(|t| (t * 2) % 32 == 0).count();
        assert_eq!(interior_roots, 3);
        assert_eq!(count_zero_crossings(&v), interior_roots);
    }
}
