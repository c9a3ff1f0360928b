//! Upper/lower envelopes through mirror-extended extrema.

use serde::{Deserialize, Serialize};

use super::emd::SiftConfig;
use super::extrema::ExtremaSet;
use super::spline::{Spline, SplineKind};
use crate::error::{Error, Result};

/// Number of extrema mirrored past each end.
pub const MIRROR_EXTREMA: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePair {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub mean: Vec<f64>,
    pub upper_kind: SplineKind,
    pub lower_kind: SplineKind,
}

/// Knot positions and values for one envelope.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Knots {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Knots {
    fn from_points(mut pts: Vec<(f64, f64)>) -> Self {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|b, a| a.0 == b.0);
        Self {
            xs: pts.iter().map(|p| p.0).collect(),
            ys: pts.iter().map(|p| p.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

fn value_range(pts: &[(usize, f64)]) -> (f64, f64) {
    pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)))
}

/// Reflects `src` through the point `(axis, pivot)` and clamps the reflected
/// values to `range`.
fn reflect<'a, I: Iterator<Item = &'a (usize, f64)>>(
    src: I,
    axis: f64,
    pivot: f64,
    range: (f64, f64),
) -> impl Iterator<Item = (f64, f64)> + use<'a, I> {
    src.map(move |&(i, v)| (2.0 * axis - i as f64, (2.0 * pivot - v).clamp(range.0, range.1)))
}

/// Extended `(maxima, minima)` knot sets for `values`.
///
/// Past each end the series is continued by point reflection through the
/// endpoint sample, so the nearest [`MIRROR_EXTREMA`] minima become maxima
/// beyond the boundary and vice versa. Reflected values are clamped to the
/// value range of the in-window extrema of the kind they join.
pub fn envelope_knots(values: &[f64], extrema: &ExtremaSet) -> Result<(Knots, Knots)> {
    let (maxima, minima) = (&extrema.maxima, &extrema.minima);
    if maxima.is_empty() || minima.is_empty() {
        return Err(Error::InsufficientExtrema { maxima: maxima.len(), minima: minima.len() });
    }
    let nb = MIRROR_EXTREMA;
    let lx = values.len() - 1;
    let (first, last) = (values[0], values[lx]);
    let (urange, lrange) = (value_range(maxima), value_range(minima));

    let mut up: Vec<(f64, f64)> = maxima.iter().map(|&(i, v)| (i as f64, v)).collect();
    up.extend(reflect(minima.iter().take(nb), 0.0, first, urange));
    up.extend(reflect(minima.iter().rev().take(nb), lx as f64, last, urange));

    let mut lo: Vec<(f64, f64)> = minima.iter().map(|&(i, v)| (i as f64, v)).collect();
    lo.extend(reflect(maxima.iter().take(nb), 0.0, first, lrange));
    lo.extend(reflect(maxima.iter().rev().take(nb), lx as f64, last, lrange));

    Ok((Knots::from_points(up), Knots::from_points(lo)))
}

fn interpolate(requested: SplineKind, knots: &Knots, n: usize) -> Option<(Vec<f64>, SplineKind)> {
    let kind = requested.resolve(knots.len())?;
    Some((Spline::new(kind, &knots.xs, &knots.ys).eval_grid(n), kind))
}

/// Upper and lower spline envelopes plus their pointwise mean.
pub fn build_envelopes(values: &[f64], extrema: &ExtremaSet, config: &SiftConfig) -> Result<EnvelopePair> {
    let (uk, lk) = envelope_knots(values, extrema)?;
    let n = values.len();
    let insufficient = || Error::InsufficientExtrema {
        maxima: extrema.maxima.len(),
        minima: extrema.minima.len(),
    };
    let (upper, upper_kind) = interpolate(config.spline_kind, &uk, n).ok_or_else(insufficient)?;
    let (lower, lower_kind) = interpolate(config.spline_kind, &lk, n).ok_or_else(insufficient)?;
    let mean = upper.iter().zip(&lower).map(|(u, l)| (u + l) / 2.0).collect();
    Ok(EnvelopePair { upper, lower, mean, upper_kind, lower_kind })
}
