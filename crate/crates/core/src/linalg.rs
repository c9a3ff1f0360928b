//! Ridge-regularised least squares shared by the linear learner and the
//! linear stacker.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ridge strength applied to standardised features.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Relative singular-value floor below which the design counts as rank deficient.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    /// `weights[o][j]`: coefficient of feature `j` for output `o`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// The design was rank deficient and the minimum-norm solution was used.
    pub singular: bool,
}

impl LinearFit {
    pub fn predict(&self, row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(row).map(|(a, x)| a * x).sum::<f64>())
            .collect()
    }
}

/// Fits `y ≈ W x + b` by ridge least squares on column-standardised features,
/// then maps the coefficients back to the raw feature scale.
pub fn ridge_fit(x: &[Vec<f64>], y: &[Vec<f64>], ridge: f64) -> Result<LinearFit> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::EmptyInput);
    }
    let p = x[0].len();
    let q = y[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != p) {
        return Err(Error::ShapeMismatch { expected: p, actual: bad.len() });
    }
    if let Some(bad) = y.iter().find(|r| r.len() != q) {
        return Err(Error::ShapeMismatch { expected: q, actual: bad.len() });
    }

    let nf = n as f64;
    let mean_x: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let mean_y: Vec<f64> = (0..q).map(|o| y.iter().map(|r| r[o]).sum::<f64>() / nf).collect();
    let scale: Vec<f64> = (0..p)
        .map(|j| {
            let var = x.iter().map(|r| (r[j] - mean_x[j]).powi(2)).sum::<f64>() / nf;
            if var > 0.0 { var.sqrt() } else { 1.0 }
        })
        .collect();

    let z = DMatrix::from_fn(n, p, |i, j| (x[i][j] - mean_x[j]) / scale[j]);
    let yc = DMatrix::from_fn(n, q, |i, o| y[i][o] - mean_y[o]);
    let gram = z.transpose() * &z;
    let rhs = z.transpose() * &yc;

    let (coef, singular) = if p == 0 {
        (DMatrix::zeros(0, q), false)
    } else {
        let svd = gram.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smax <= 0.0 || smin <= RANK_TOL * smax {
            let svd = gram.svd(true, true);
            let eps = (RANK_TOL * smax).max(f64::MIN_POSITIVE);
            let sol = svd
                .solve(&rhs, eps)
                .map_err(|e| Error::InvalidConfig(format!("pseudo-inverse failed: {e}")))?;
            (sol, true)
        } else {
            let mut reg = gram;
            for j in 0..p {
                reg[(j, j)] += ridge * nf;
            }
            match reg.clone().cholesky() {
                Some(ch) => (ch.solve(&rhs), false),
                None => {
                    let sol = reg
                        .svd(true, true)
                        .solve(&rhs, RANK_TOL * smax)
                        .map_err(|e| Error::InvalidConfig(format!("pseudo-inverse failed: {e}")))?;
                    (sol, true)
                }
            }
        }
    };

    let mut weights = vec![vec![0.0; p]; q];
    let mut bias = mean_y.clone();
    for o in 0..q {
        for j in 0..p {
            let w = coef[(j, o)] / scale[j];
            weights[o][j] = w;
            bias[o] -= w * mean_x[j];
        }
    }
    Ok(LinearFit { weights, bias, singular })
}

/// Single-output convenience wrapper.
pub fn ridge_fit_scalar(x: &[Vec<f64>], y: &[f64], ridge: f64) -> Result<LinearFit> {
    let ys: Vec<Vec<f64>> = y.iter().map(|&v| vec![v]).collect();
    ridge_fit(x, &ys, ridge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_plane() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let a = (i as f64 * 0.37).sin() * 3.0;
                let b = (i as f64 * 0.11).cos() * 5.0 + i as f64 * 0.1;
                vec![a, b]
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] - r[1] + 3.0).collect();
        let fit = ridge_fit_scalar(&x, &y, DEFAULT_RIDGE).unwrap();
        assert!(!fit.singular);
        assert!((fit.weights[0][0] - 2.0).abs() < 1e-6);
        assert!((fit.weights[0][1] + 1.0).abs() < 1e-6);
        assert!((fit.bias[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn duplicated_column_is_flagged_and_split() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| 4.0 * i as f64 + 1.0).collect();
        let fit = ridge_fit_scalar(&x, &y, DEFAULT_RIDGE).unwrap();
        assert!(fit.singular);
        assert!((fit.weights[0][0] - 2.0).abs() < 1e-8);
        assert!((fit.weights[0][1] - 2.0).abs() < 1e-8);
        assert!((fit.predict(&[3.0, 3.0])[0] - 13.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_ragged_rows() {
        let x = vec![vec![1.0, 2.0], vec![1.0]];
        let y = vec![1.0, 2.0];
        assert!(matches!(
            ridge_fit_scalar(&x, &y, DEFAULT_RIDGE),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
