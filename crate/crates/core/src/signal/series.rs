use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled scalar flow sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    interval_minutes: f64,
    origin_index: i64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, interval_minutes: f64) -> Result<Self> {
        Self::with_origin(values, interval_minutes, 0)
    }

    pub fn with_origin(values: Vec<f64>, interval_minutes: f64, origin_index: i64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series is empty".into()));
        }
        if !(interval_minutes.is_finite() && interval_minutes > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "interval must be positive, got {interval_minutes}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite value at index {i}")));
        }
        Ok(Self { values, interval_minutes, origin_index })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn interval_minutes(&self) -> f64 {
        self.interval_minutes
    }

    pub fn origin_index(&self) -> i64 {
        self.origin_index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Contiguous sub-series `[start, end)`; the origin index tracks the offset.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.values.len() {
            return Err(Error::InvalidSeries(format!(
                "slice {start}..{end} out of range for length {}",
                self.values.len()
            )));
        }
        Ok(Self {
            values: self.values[start..end].to_vec(),
            interval_minutes: self.interval_minutes,
            origin_index: self.origin_index + start as i64,
        })
    }
}
