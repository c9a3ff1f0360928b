//! Series loading, chronological splitting and the shared window geometry.

use std::sync::{Arc, Mutex};

use super::config::{DataSource, ExperimentConfig};
use crate::error::{Error, Result};
use crate::pipeline::{generate, ingest_csv_segments, minutes_to_steps, window_starts, IngestOptions, SplitSpec};
use crate::rng::stream_seed;
use crate::signal::TimeSeries;

/// Records which stage read which split's targets.
#[derive(Debug, Default)]
pub struct AccessLog(Mutex<Vec<String>>);

impl AccessLog {
    pub fn record(&self, entry: String) {
        let mut log = self.0.lock().expect("access log poisoned");
        if !log.contains(&entry) {
            log.push(entry);
        }
    }

    pub fn entries(&self) -> Vec<String> {
        self.0.lock().expect("access log poisoned").clone()
    }
}

/// Values whose every read is logged as `split:stage`.
#[derive(Debug, Clone)]
pub struct Guarded<T> {
    value: T,
    split: &'static str,
    log: Arc<AccessLog>,
}

impl<T> Guarded<T> {
    pub fn new(value: T, split: &'static str, log: Arc<AccessLog>) -> Self {
        Self { value, split, log }
    }

    pub fn open(&self, stage: &str) -> &T {
        self.log.record(format!("{}:{stage}", self.split));
        &self.value
    }
}

/// Input/target windows of one split at the base resolution.
#[derive(Debug, Clone)]
pub struct WindowSet {
    pub split: &'static str,
    pub input_steps: usize,
    pub target_steps: usize,
    /// Absolute timeline position of each window's first sample.
    pub positions: Vec<i64>,
    pub inputs: Vec<Vec<f64>>,
    /// Raw horizon samples.
    pub horizons: Guarded<Vec<Vec<f64>>>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Horizon sums, the scalar forecasting targets.
    pub fn scalar_targets(&self, stage: &str) -> Vec<f64> {
        self.horizons.open(stage).iter().map(|h| h.iter().sum()).collect()
    }

    /// Full input+horizon sequences, for decomposition that sees the target.
    pub fn sequences(&self, stage: &str) -> Vec<Vec<f64>> {
        self.inputs.iter().zip(self.horizons.open(stage)).map(|(x, y)| [x.as_slice(), y].concat()).collect()
    }
}

/// One site's data for one repeat, split and windowed.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub site: String,
    pub interval_minutes: f64,
    pub input_steps: usize,
    pub target_steps: usize,
    pub train: WindowSet,
    pub validation: WindowSet,
    pub test: WindowSet,
    pub access: Arc<AccessLog>,
}

/// Site labels the config will produce.
pub fn site_names(config: &ExperimentConfig) -> Vec<String> {
    match &config.data {
        DataSource::Synthetic(_) => vec!["synthetic".into()],
        DataSource::Csv { sites, .. } if sites.is_empty() => vec!["all".into()],
        DataSource::Csv { sites, .. } => sites.clone(),
    }
}

/// Contiguous pieces of the recording; more than one when long gaps split it.
pub fn load_series(config: &ExperimentConfig, site: &str, seed: u64) -> Result<Vec<TimeSeries>> {
    match &config.data {
        DataSource::Synthetic(spec) => {
            let spec = crate::pipeline::SyntheticSpec { seed: stream_seed(seed, "data"), ..spec.clone() };
            Ok(vec![generate(&spec)?])
        }
        DataSource::Csv { path, columns, sites } => {
            let options = IngestOptions {
                columns: columns.clone(),
                site: (!sites.is_empty()).then(|| site.to_string()),
                interval_minutes: None,
            };
            Ok(ingest_csv_segments(path, &options)?.0)
        }
    }
}

/// Chronological split across pieces by total sample count.
pub fn split_pieces(pieces: &[TimeSeries], spec: &SplitSpec) -> Result<[Vec<TimeSeries>; 3]> {
    spec.validate()?;
    let n: usize = pieces.iter().map(TimeSeries::len).sum();
    let (a, b) = spec.boundaries(n);
    if a == 0 || b == a || b == n {
        return Err(Error::SeriesTooShort { required: 3, actual: n });
    }
    let cuts = [0, a, b, n];
    let mut out: [Vec<TimeSeries>; 3] = Default::default();
    let mut offset = 0;
    for piece in pieces {
        let (lo, hi) = (offset, offset + piece.len());
        for (k, part) in out.iter_mut().enumerate() {
            let (s, e) = (cuts[k].max(lo), cuts[k + 1].min(hi));
            if s < e {
                part.push(piece.slice(s - lo, e - lo)?);
            }
        }
        offset = hi;
    }
    Ok(out)
}

fn windows(
    pieces: &[TimeSeries],
    split: &'static str,
    input_steps: usize,
    target_steps: usize,
    stride: usize,
    log: &Arc<AccessLog>,
) -> Result<WindowSet> {
    let span = input_steps + target_steps;
    let (mut positions, mut inputs, mut horizons) = (Vec::new(), Vec::new(), Vec::new());
    for piece in pieces.iter().filter(|p| p.len() >= span) {
        let v = piece.values();
        for s in window_starts(v.len(), span, stride)? {
            positions.push(piece.origin_index() + s as i64);
            inputs.push(v[s..s + input_steps].to_vec());
            horizons.push(v[s + input_steps..s + span].to_vec());
        }
    }
    if positions.is_empty() {
        let available = pieces.iter().map(TimeSeries::len).max().unwrap_or(0);
        return Err(Error::HorizonTooLong { window: span, available });
    }
    Ok(WindowSet {
        split,
        input_steps,
        target_steps,
        positions,
        inputs,
        horizons: Guarded::new(horizons, split, log.clone()),
    })
}

/// Loads, splits and windows one site for the repeat seeded by `seed`.
pub fn prepare_data(config: &ExperimentConfig, site: &str, seed: u64) -> Result<PreparedData> {
    let pieces = load_series(config, site, seed)?;
    let interval = pieces[0].interval_minutes();
    let input_steps = minutes_to_steps(config.input_minutes, interval)?;
    let target_steps = minutes_to_steps(config.target_minutes, interval)?;
    for &r in config.resolutions.iter().chain(std::iter::once(&config.single_resolution)) {
        if input_steps % r != 0 {
            return Err(Error::InvalidConfig(format!(
                "resolution {r} does not divide the {input_steps}-sample input window"
            )));
        }
    }
    let [train, validation, test] = split_pieces(&pieces, &config.split)?;
    let access = Arc::new(AccessLog::default());
    let s = config.strides;
    Ok(PreparedData {
        site: site.to_string(),
        interval_minutes: interval,
        input_steps,
        target_steps,
        train: windows(&train, "train", input_steps, target_steps, s.train, &access)?,
        validation: windows(&validation, "validation", input_steps, target_steps, s.validation, &access)?,
        test: windows(&test, "test", input_steps, target_steps, s.test, &access)?,
        access,
    })
}
