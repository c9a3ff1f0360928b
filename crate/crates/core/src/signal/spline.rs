//! Envelope interpolants: Akima, natural cubic and piecewise linear.
//!
//! All three are stored as per-interval cubic polynomials in the local
//! coordinate `d = x - x_i`, and extrapolate by extending the first or last
//! piece.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplineKind {
    Akima,
    Cubic,
    Linear,
}

impl SplineKind {
    /// Fewest knots the method accepts.
    pub fn min_knots(self) -> usize {
        match self {
            SplineKind::Akima => 5,
            SplineKind::Cubic => 4,
            SplineKind::Linear => 2,
        }
    }

    fn fallback(self) -> Option<SplineKind> {
        match self {
            SplineKind::Akima => Some(SplineKind::Cubic),
            SplineKind::Cubic => Some(SplineKind::Linear),
            SplineKind::Linear => None,
        }
    }

    /// Walks the akima → cubic → linear ladder from `self` until the knot
    /// count is supported.
    pub fn resolve(self, knots: usize) -> Option<SplineKind> {
        let mut kind = Some(self);
        while let Some(k) = kind {
            if knots >= k.min_knots() {
                return Some(k);
            }
            kind = k.fallback();
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct Spline {
    xs: Vec<f64>,
    // c0 + c1 d + c2 d^2 + c3 d^3 on [xs[i], xs[i+1]]
    coeffs: Vec<[f64; 4]>,
}

impl Spline {
    /// Builds the interpolant. `xs` must be strictly increasing and the knot
    /// count must satisfy `kind.min_knots()`.
    pub fn new(kind: SplineKind, xs: &[f64], ys: &[f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= kind.min_knots(), "too few knots for {kind:?}");
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        let coeffs = match kind {
            SplineKind::Akima => akima_coeffs(xs, ys),
            SplineKind::Cubic => natural_cubic_coeffs(xs, ys),
            SplineKind::Linear => linear_coeffs(xs, ys),
        };
        Self { xs: xs.to_vec(), coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.segment(x);
        self.eval_in(k, x)
    }

    fn eval_in(&self, k: usize, x: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coeffs[k];
        let d = x - self.xs[k];
        c0 + d * (c1 + d * (c2 + d * c3))
    }

    fn segment(&self, x: f64) -> usize {
        let last = self.coeffs.len() - 1;
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(last),
        }
    }

    /// Evaluates at `0, 1, ..., n-1`.
    pub fn eval_grid(&self, n: usize) -> Vec<f64> {
        let last = self.coeffs.len() - 1;
        let mut k = 0;
        (0..n)
            .map(|t| {
                let x = t as f64;
                while k < last && self.xs[k + 1] <= x {
                    k += 1;
                }
                self.eval_in(k, x)
            })
            .collect()
    }
}

fn hermite(xs: &[f64], ys: &[f64], slopes: &[f64]) -> Vec<[f64; 4]> {
    (0..xs.len() - 1)
        .map(|i| {
            let h = xs[i + 1] - xs[i];
            let m = (ys[i + 1] - ys[i]) / h;
            let (s0, s1) = (slopes[i], slopes[i + 1]);
            [ys[i], s0, (3.0 * m - 2.0 * s0 - s1) / h, (s0 + s1 - 2.0 * m) / (h * h)]
        })
        .collect()
}

fn akima_coeffs(xs: &[f64], ys: &[f64]) -> Vec<[f64; 4]> {
    let n = xs.len();
    // m[k + 2] is the secant slope of interval k; two ghost slopes each side.
    let mut m = vec![0.0; n + 3];
    for i in 0..n - 1 {
        m[i + 2] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    }
    m[1] = 2.0 * m[2] - m[3];
    m[0] = 2.0 * m[1] - m[2];
    m[n + 1] = 2.0 * m[n] - m[n - 1];
    m[n + 2] = 2.0 * m[n + 1] - m[n];

    let slopes: Vec<f64> = (0..n)
        .map(|i| {
            let w1 = (m[i + 3] - m[i + 2]).abs();
            let w2 = (m[i + 1] - m[i]).abs();
            if w1 + w2 == 0.0 {
                0.5 * (m[i + 1] + m[i + 2])
            } else {
                (w1 * m[i + 1] + w2 * m[i + 2]) / (w1 + w2)
            }
        })
        .collect();
    hermite(xs, ys, &slopes)
}

fn natural_cubic_coeffs(xs: &[f64], ys: &[f64]) -> Vec<[f64; 4]> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    // Second derivatives; natural ends fix sigma[0] = sigma[n-1] = 0.
    let mut sigma = vec![0.0; n];
    let interior = n - 2;
    if interior > 0 {
        let mut diag = vec![0.0; interior];
        let mut upper = vec![0.0; interior];
        let mut rhs = vec![0.0; interior];
        for k in 0..interior {
            let i = k + 1;
            diag[k] = 2.0 * (h[i - 1] + h[i]);
            upper[k] = h[i];
            rhs[k] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
        }
        // Thomas algorithm; the system is symmetric so lower == upper shifted.
        for k in 1..interior {
            let w = h[k] / diag[k - 1];
            diag[k] -= w * upper[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        sigma[interior] = rhs[interior - 1] / diag[interior - 1];
        for k in (0..interior - 1).rev() {
            sigma[k + 1] = (rhs[k] - upper[k] * sigma[k + 2]) / diag[k];
        }
    }
    (0..n - 1)
        .map(|i| {
            let hi = h[i];
            [
                ys[i],
                (ys[i + 1] - ys[i]) / hi - hi * (2.0 * sigma[i] + sigma[i + 1]) / 6.0,
                sigma[i] / 2.0,
                (sigma[i + 1] - sigma[i]) / (6.0 * hi),
            ]
        })
        .collect()
}

fn linear_coeffs(xs: &[f64], ys: &[f64]) -> Vec<[f64; 4]> {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| [y[0], (y[1] - y[0]) / (x[1] - x[0]), 0.0, 0.0])
        .collect()
}
