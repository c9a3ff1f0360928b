//! CSV ingestion into uniformly sampled series.

use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// Header names of the columns to read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub timestamp: String,
    pub flow: String,
    /// Site identifier column for multi-site files.
    pub site: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self { timestamp: "timestamp".into(), flow: "flow".into(), site: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    pub columns: ColumnMap,
    /// Keep only rows of this site (requires `columns.site`).
    pub site: Option<String>,
    /// Sampling interval; inferred as the most common timestamp step if unset.
    pub interval_minutes: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    /// 1-based data row (header excluded) at which the gap ends.
    pub row: usize,
    pub gap_minutes: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows: usize,
    pub interval_minutes: f64,
    /// Output sample indices (within their segment) filled by interpolation.
    pub interpolated: Vec<usize>,
    /// Gaps longer than one sample; each starts a new segment.
    pub long_gaps: Vec<GapRecord>,
    pub segment_lengths: Vec<usize>,
}

const STEP_TOLERANCE: f64 = 1e-6;

fn parse_timestamp(raw: &str, row: usize) -> Result<f64> {
    let raw = raw.trim();
    if let Ok(secs) = raw.parse::<f64>() {
        if secs.is_finite() {
            return Ok(secs);
        }
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Ok(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_millis()) / 1e3);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(dt.and_utc().timestamp() as f64);
        }
    }
    Err(Error::MalformedInput { row, message: format!("unparseable timestamp `{raw}`") })
}

fn parse_flow(raw: &str, row: usize) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(Error::MalformedInput { row, message: format!("flow must be a non-negative number, got `{raw}`") }),
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Most common positive step between consecutive timestamps, in seconds.
fn modal_step(stamps: &[f64]) -> Option<f64> {
    let mut steps: Vec<i64> = stamps.windows(2).map(|w| ((w[1] - w[0]) * 1e3).round() as i64).filter(|&s| s > 0).collect();
    steps.sort_unstable();
    let mut best: Option<(i64, usize)> = None;
    for chunk in steps.chunk_by(|a, b| a == b) {
        if best.is_none_or(|(_, n)| chunk.len() > n) {
            best = Some((chunk[0], chunk.len()));
        }
    }
    best.map(|(ms, _)| ms as f64 / 1e3)
}

/// Reads a flow CSV and returns one series per gap-free segment.
///
/// Single missing samples are linearly interpolated; longer gaps split the
/// recording. Rows must be strictly increasing in time.
pub fn ingest_csv_segments(path: &Path, options: &IngestOptions) -> Result<(Vec<TimeSeries>, IngestReport)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let ts_col = column(&headers, &options.columns.timestamp)?;
    let flow_col = column(&headers, &options.columns.flow)?;
    let site_col = options.columns.site.as_deref().map(|s| column(&headers, s)).transpose()?;
    if options.site.is_some() && site_col.is_none() {
        return Err(Error::InvalidConfig("a site filter needs a site column".into()));
    }

    let mut stamps = Vec::new();
    let mut flows = Vec::new();
    let mut rows = Vec::new();
    let mut first_site: Option<String> = None;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if let Some(c) = site_col {
            let site = record.get(c).unwrap_or("").trim().to_string();
            match &options.site {
                Some(want) if *want != site => continue,
                Some(_) => {}
                None => match &first_site {
                    None => first_site = Some(site),
                    Some(s) if *s != site => {
                        return Err(Error::InvalidConfig(format!(
                            "file holds several sites (`{s}`, `{site}`); select one"
                        )))
                    }
                    Some(_) => {}
                },
            }
        }
        stamps.push(parse_timestamp(record.get(ts_col).unwrap_or(""), row)?);
        flows.push(parse_flow(record.get(flow_col).unwrap_or(""), row)?);
        rows.push(row);
    }
    if stamps.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }

    let step_secs = match options.interval_minutes {
        Some(m) if m > 0.0 && m.is_finite() => m * 60.0,
        Some(m) => return Err(Error::InvalidConfig(format!("interval must be positive, got {m}"))),
        None => modal_step(&stamps)
            .ok_or_else(|| Error::InvalidSeries("cannot infer the sampling interval from a single row".into()))?,
    };
    let interval_minutes = step_secs / 60.0;

    let mut report = IngestReport { rows: stamps.len(), interval_minutes, ..Default::default() };
    let mut segments: Vec<TimeSeries> = Vec::new();
    let mut current = vec![flows[0]];
    let mut origin = 0i64;
    let mut position = 0i64;
    for k in 1..stamps.len() {
        let ratio = (stamps[k] - stamps[k - 1]) / step_secs;
        let steps = ratio.round();
        if ratio <= 0.0 || steps < 1.0 {
            return Err(Error::MalformedInput { row: rows[k], message: "timestamps must be strictly increasing".into() });
        }
        if (ratio - steps).abs() > STEP_TOLERANCE * steps.max(1.0) {
            return Err(Error::NonUniformInterval { row: rows[k], gap_minutes: ratio * interval_minutes });
        }
        position += steps as i64;
        match steps as i64 {
            1 => current.push(flows[k]),
            2 => {
                report.interpolated.push(current.len());
                current.push((flows[k - 1] + flows[k]) / 2.0);
                current.push(flows[k]);
            }
            _ => {
                report.long_gaps.push(GapRecord { row: rows[k], gap_minutes: steps * interval_minutes });
                let done = std::mem::replace(&mut current, vec![flows[k]]);
                report.segment_lengths.push(done.len());
                segments.push(TimeSeries::with_origin(done, interval_minutes, origin)?);
                origin = position;
            }
        }
    }
    report.segment_lengths.push(current.len());
    segments.push(TimeSeries::with_origin(current, interval_minutes, origin)?);
    Ok((segments, report))
}

/// Reads a flow CSV into a single uniform series.
///
/// Fails with [`Error::NonUniformInterval`] if a gap of more than one sample
/// remains; use [`ingest_csv_segments`] to window such files piecewise.
pub fn ingest_csv(path: &Path, options: &IngestOptions) -> Result<(TimeSeries, IngestReport)> {
    let (mut segments, report) = ingest_csv_segments(path, options)?;
    if let Some(gap) = report.long_gaps.first() {
        return Err(Error::NonUniformInterval { row: gap.row, gap_minutes: gap.gap_minutes });
    }
    Ok((segments.remove(0), report))
}
