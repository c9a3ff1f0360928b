use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// Sum of the horizon samples.
    #[default]
    Scalar,
    /// The horizon samples themselves.
    PerStep,
}

/// One supervised sample: `input` precedes `target` in the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPair {
    pub input: Vec<f64>,
    /// Length 1 in scalar mode, the horizon length in per-step mode.
    pub target: Vec<f64>,
    /// Index of the first input sample in the source series.
    pub source_index: usize,
}

/// Converts a duration to a whole number of samples.
pub fn minutes_to_steps(minutes: f64, interval_minutes: f64) -> Result<usize> {
    let ratio = minutes / interval_minutes;
    let steps = ratio.round();
    if !(ratio.is_finite() && steps >= 1.0 && (ratio - steps).abs() < 1e-9 * steps) {
        return Err(Error::InvalidConfig(format!(
            "{minutes} min is not a positive multiple of the {interval_minutes} min interval"
        )));
    }
    Ok(steps as usize)
}

/// Window start positions for `len` samples, `span` samples per window.
pub fn window_starts(len: usize, span: usize, stride: usize) -> Result<Vec<usize>> {
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be at least 1".into()));
    }
    if span > len {
        return Err(Error::HorizonTooLong { window: span, available: len });
    }
    Ok((0..=len - span).step_by(stride).collect())
}

/// Slices `values` into input/target pairs of `input_steps` and
/// `target_steps` samples, advancing by `stride`.
pub fn slice_steps(
    values: &[f64],
    input_steps: usize,
    target_steps: usize,
    stride: usize,
    mode: TargetMode,
) -> Result<Vec<WindowPair>> {
    if input_steps == 0 || target_steps == 0 {
        return Err(Error::InvalidConfig("input and target horizons must be at least one sample".into()));
    }
    let starts = window_starts(values.len(), input_steps + target_steps, stride)?;
    Ok(starts
        .into_iter()
        .map(|s| {
            let horizon = &values[s + input_steps..s + input_steps + target_steps];
            let target = match mode {
                TargetMode::Scalar => vec![horizon.iter().sum()],
                TargetMode::PerStep => horizon.to_vec(),
            };
            WindowPair { input: values[s..s + input_steps].to_vec(), target, source_index: s }
        })
        .collect())
}

/// [`slice_steps`] with horizons given in minutes.
pub fn slice_windows(
    series: &TimeSeries,
    input_minutes: f64,
    target_minutes: f64,
    stride: usize,
    mode: TargetMode,
) -> Result<Vec<WindowPair>> {
    let i = minutes_to_steps(input_minutes, series.interval_minutes())?;
    let t = minutes_to_steps(target_minutes, series.interval_minutes())?;
    slice_steps(series.values(), i, t, stride, mode)
}

/// Sums consecutive non-overlapping groups of `r` samples, dropping a
/// trailing partial group.
pub fn aggregate_values(values: &[f64], r: usize) -> Vec<f64> {
    assert!(r >= 1, "resolution must be at least 1");
    values.chunks_exact(r).map(|c| c.iter().sum()).collect()
}

/// Sum aggregation to an `r`-times coarser interval.
pub fn aggregate_resolution(series: &TimeSeries, r: usize) -> Result<TimeSeries> {
    if r == 0 {
        return Err(Error::InvalidConfig("resolution must be at least 1".into()));
    }
    let values = aggregate_values(series.values(), r);
    if values.is_empty() {
        return Err(Error::SeriesTooShort { required: r, actual: series.len() });
    }
    TimeSeries::with_origin(values, series.interval_minutes() * r as f64, series.origin_index())
}
