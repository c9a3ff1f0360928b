//! Decompose-then-slice: per-window decomposition into component datasets.

use serde::{Deserialize, Serialize};

use super::window::window_starts;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::noise::{ceemdan, eemd, NoiseConfig};
use crate::rng;
use crate::signal::{emd, Decomposition, DecompositionMethod, SiftConfig};

/// Whether the decomposition of a window may see its target region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMode {
    /// Decompose the whole input+target sequence and slice afterwards.
    #[default]
    PaperFaithful,
    /// Decompose only the input region; every component is paired with the
    /// raw target.
    StrictCausal,
}

impl LeakageMode {
    pub fn name(self) -> &'static str {
        match self {
            LeakageMode::PaperFaithful => "paper_faithful",
            LeakageMode::StrictCausal => "strict_causal",
        }
    }
}

impl std::str::FromStr for LeakageMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::PaperFaithful, Self::StrictCausal]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown leakage mode `{s}`")))
    }
}

/// Per-window baseline removed before decomposition and added back to the
/// forecast. Fitted on the input region only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detrend {
    None,
    /// Input-region mean.
    Level,
    /// Least-squares line through the input region, extrapolated.
    #[default]
    Linear,
}

impl Detrend {
    /// Baseline over `total` samples fitted to `input`.
    pub fn baseline(self, input: &[f64], total: usize) -> Vec<f64> {
        let n = input.len() as f64;
        match self {
            Detrend::None => vec![0.0; total],
            Detrend::Level => vec![input.iter().sum::<f64>() / n; total],
            Detrend::Linear => {
                let tm = (n - 1.0) / 2.0;
                let ym = input.iter().sum::<f64>() / n;
                let (mut sxy, mut sxx) = (0.0, 0.0);
                for (t, y) in input.iter().enumerate() {
                    let dt = t as f64 - tm;
                    sxy += dt * (y - ym);
                    sxx += dt * dt;
                }
                let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
                (0..total).map(|t| ym + slope * (t as f64 - tm)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecomposeSpec {
    pub method: DecompositionMethod,
    pub sift: SiftConfig,
    pub noise: NoiseConfig,
    /// Components kept per window, in extraction order.
    pub top_m: usize,
    pub leakage: LeakageMode,
    pub detrend: Detrend,
}

impl Default for DecomposeSpec {
    fn default() -> Self {
        Self {
            method: DecompositionMethod::Eemd,
            sift: SiftConfig::default(),
            noise: NoiseConfig::default(),
            top_m: 5,
            leakage: LeakageMode::PaperFaithful,
            detrend: Detrend::default(),
        }
    }
}

/// Overlapping input+target sequences cut from one contiguous series.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    pub input_steps: usize,
    pub target_steps: usize,
    pub stride: usize,
    /// Absolute position of `values[0]` in the recording; seeds per-window noise.
    pub origin: i64,
    pub starts: Vec<usize>,
    pub sequences: Vec<Vec<f64>>,
}

impl SequenceSet {
    pub fn new(values: &[f64], input_steps: usize, target_steps: usize, stride: usize, origin: i64) -> Result<Self> {
        if input_steps == 0 || target_steps == 0 {
            return Err(Error::InvalidConfig("input and target horizons must be at least one sample".into()));
        }
        let span = input_steps + target_steps;
        let starts = window_starts(values.len(), span, stride)?;
        let sequences = starts.iter().map(|&s| values[s..s + span].to_vec()).collect();
        Ok(Self { input_steps, target_steps, stride, origin, starts, sequences })
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// Noise seed of window `i`, a function of its absolute position only.
    pub fn window_seed(&self, seed: u64, i: usize) -> u64 {
        rng::sub_seed(seed, (self.origin + self.starts[i] as i64) as u64)
    }
}

/// Decomposes one sequence with the given method, trials run sequentially.
pub fn decompose_sequence(
    values: &[f64],
    method: DecompositionMethod,
    sift: &SiftConfig,
    noise: &NoiseConfig,
    exec: Execution,
) -> Result<Decomposition> {
    match method {
        DecompositionMethod::Emd => emd(values, sift),
        DecompositionMethod::Eemd => eemd(values, noise, sift, exec),
        DecompositionMethod::Ceemdan => ceemdan(values, noise, sift, exec),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedWindow {
    pub source_index: usize,
    pub reason: String,
}

/// Index-aligned component datasets for one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDataset {
    pub method: DecompositionMethod,
    pub leakage: LeakageMode,
    pub detrend: Detrend,
    pub input_steps: usize,
    pub target_steps: usize,
    pub top_m: usize,
    /// Start of each kept window in the split.
    pub source_index: Vec<usize>,
    /// `inputs[m][i]`: component `m` of window `i` over the input region.
    pub inputs: Vec<Vec<Vec<f64>>>,
    /// `targets[m][i]`: what component learner `m` is trained to emit.
    pub targets: Vec<Vec<Vec<f64>>>,
    /// Baseline over the horizon, added back after aggregation.
    pub offsets: Vec<Vec<f64>>,
    /// Raw horizon samples.
    pub truth: Vec<Vec<f64>>,
    /// IMFs the decomposition produced for each window before truncation.
    pub imf_counts: Vec<usize>,
    pub dropped: Vec<DroppedWindow>,
}

impl ComponentDataset {
    pub fn len(&self) -> usize {
        self.source_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_index.is_empty()
    }

    /// Horizon sum of window `i`, the scalar forecasting target.
    pub fn scalar_truth(&self, i: usize) -> f64 {
        self.truth[i].iter().sum()
    }

    pub fn offset_sum(&self, i: usize) -> f64 {
        self.offsets[i].iter().sum()
    }

    /// Windows that produced fewer than `top_m` IMFs.
    pub fn zero_filled(&self) -> usize {
        self.imf_counts.iter().filter(|&&c| c < self.top_m).count()
    }
}

struct WindowParts {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    imf_count: usize,
}

fn decompose_window(seq: &[f64], input_steps: usize, spec: &DecomposeSpec, seed: u64) -> Result<WindowParts> {
    let (input, horizon) = seq.split_at(input_steps);
    let baseline = spec.detrend.baseline(input, seq.len());
    let noise = NoiseConfig { seed, ..spec.noise.clone() };
    let region = match spec.leakage {
        LeakageMode::PaperFaithful => seq,
        LeakageMode::StrictCausal => input,
    };
    let centred: Vec<f64> = region.iter().zip(&baseline).map(|(v, b)| v - b).collect();
    let d = decompose_sequence(&centred, spec.method, &spec.sift, &noise, Execution::Sequential)?;
    let offsets = baseline[input_steps..].to_vec();
    let component = |m: usize| d.imfs.get(m).cloned().unwrap_or_else(|| vec![0.0; centred.len()]);
    let (inputs, targets) = match spec.leakage {
        LeakageMode::PaperFaithful => (0..spec.top_m)
            .map(|m| {
                let mut c = component(m);
                let tail = c.split_off(input_steps);
                (c, tail)
            })
            .unzip(),
        LeakageMode::StrictCausal => {
            let target: Vec<f64> = horizon.iter().zip(&offsets).map(|(y, b)| y - b).collect();
            ((0..spec.top_m).map(component).collect(), vec![target; spec.top_m])
        }
    };
    Ok(WindowParts { inputs, targets, offsets, imf_count: d.imfs.len() })
}

/// Decomposes every sequence independently and slices each of the first
/// `top_m` components at the input/target boundary.
///
/// Windows with fewer IMFs get all-zero components. Windows whose
/// decomposition fails are dropped and listed in `dropped`.
pub fn decompose_dataset(seqs: &SequenceSet, spec: &DecomposeSpec, exec: Execution) -> Result<ComponentDataset> {
    if spec.top_m == 0 {
        return Err(Error::InvalidConfig("top_m must be at least 1".into()));
    }
    spec.sift.validate()?;
    spec.noise.validate()?;
    let parts = exec.map(seqs.len(), |i| {
        decompose_window(&seqs.sequences[i], seqs.input_steps, spec, seqs.window_seed(spec.noise.seed, i))
    });

    let m = spec.top_m;
    let mut out = ComponentDataset {
        method: spec.method,
        leakage: spec.leakage,
        detrend: spec.detrend,
        input_steps: seqs.input_steps,
        target_steps: seqs.target_steps,
        top_m: m,
        source_index: Vec::new(),
        inputs: vec![Vec::new(); m],
        targets: vec![Vec::new(); m],
        offsets: Vec::new(),
        truth: Vec::new(),
        imf_counts: Vec::new(),
        dropped: Vec::new(),
    };
    for (i, part) in parts.into_iter().enumerate() {
        let start = seqs.starts[i];
        match part {
            Ok(p) => {
                for (k, (x, y)) in p.inputs.into_iter().zip(p.targets).enumerate() {
                    out.inputs[k].push(x);
                    out.targets[k].push(y);
                }
                out.source_index.push(start);
                out.offsets.push(p.offsets);
                out.truth.push(seqs.sequences[i][seqs.input_steps..].to_vec());
                out.imf_counts.push(p.imf_count);
            }
            Err(e) => out.dropped.push(DroppedWindow { source_index: start, reason: e.to_string() }),
        }
    }
    Ok(out)
}
