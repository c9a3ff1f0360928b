//! Versioned experiment configuration, loadable from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::{AggregationKind, NeuralStackerConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::learners::{LearnerKind, LearnerSpec, SearchSpace};
use crate::noise::NoiseConfig;
use crate::pipeline::{ColumnMap, Detrend, LeakageMode, SplitSpec, SyntheticSpec};
use crate::rng::sub_seed;
use crate::signal::{DecompositionMethod, SiftConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Single,
    Bagging,
    MultiResolution,
    Emd,
    Eemd,
    Ceemdan,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Self::Single, Self::Bagging, Self::MultiResolution, Self::Emd, Self::Eemd, Self::Ceemdan];

    pub fn name(self) -> &'static str {
        match self {
            Self::Single => "single",
            Self::Bagging => "bagging",
            Self::MultiResolution => "multi_resolution",
            Self::Emd => "emd",
            Self::Eemd => "eemd",
            Self::Ceemdan => "ceemdan",
        }
    }

    pub fn decomposition(self) -> Option<DecompositionMethod> {
        match self {
            Self::Emd => Some(DecompositionMethod::Emd),
            Self::Eemd => Some(DecompositionMethod::Eemd),
            Self::Ceemdan => Some(DecompositionMethod::Ceemdan),
            _ => None,
        }
    }

    /// Baseline used when a pipeline lists no aggregation.
    pub fn default_aggregation(self) -> Option<AggregationKind> {
        match self {
            Self::Single => None,
            Self::Bagging | Self::MultiResolution => Some(AggregationKind::Mean),
            _ => Some(AggregationKind::Sum),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// Where the flow series comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    /// Regenerated for every repeat, seeded from the repeat seed.
    Synthetic(SyntheticSpec),
    Csv {
        path: PathBuf,
        #[serde(default)]
        columns: ColumnMap,
        /// Sites to model; empty means the whole file.
        #[serde(default)]
        sites: Vec<String>,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        Self::Synthetic(SyntheticSpec::default())
    }
}

/// One method evaluated under one or more aggregations from a single
/// trained ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub method: Method,
    #[serde(default)]
    pub aggregations: Vec<AggregationKind>,
}

impl PipelineSpec {
    pub fn new(method: Method, aggregations: &[AggregationKind]) -> Self {
        Self { method, aggregations: aggregations.to_vec() }
    }

    /// Aggregations to evaluate, with the method's baseline filled in.
    pub fn resolved_aggregations(&self) -> Vec<Option<AggregationKind>> {
        if self.aggregations.is_empty() {
            vec![self.method.default_aggregation()]
        } else {
            self.aggregations.iter().copied().map(Some).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Strides {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl Default for Strides {
    fn default() -> Self {
        Self { train: 1, validation: 1, test: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaggingConfig {
    pub members: usize,
    pub fraction: f64,
}

impl Default for BaggingConfig {
    fn default() -> Self {
        Self { members: 25, fraction: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecompositionConfig {
    pub sift: SiftConfig,
    pub noise: NoiseConfig,
    pub top_m: usize,
    pub detrend: Detrend,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self { sift: SiftConfig::default(), noise: NoiseConfig::default(), top_m: 5, detrend: Detrend::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningConfig {
    pub budget: usize,
    pub space: SearchSpace,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self { budget: 10, space: SearchSpace::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub data: DataSource,
    pub pipelines: Vec<PipelineSpec>,
    pub input_minutes: f64,
    pub target_minutes: f64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// One seed per repeat. Empty derives them from `base_seed`.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub leakage: LeakageMode,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub strides: Strides,
    #[serde(default)]
    pub learner: LearnerSpec,
    #[serde(default)]
    pub tuning: TuningConfig,
    #[serde(default)]
    pub stacker: NeuralStackerConfig,
    #[serde(default)]
    pub decomposition: DecompositionConfig,
    #[serde(default)]
    pub bagging: BaggingConfig,
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    /// Input resolution of the single-learner baseline.
    #[serde(default = "default_single_resolution")]
    pub single_resolution: usize,
    #[serde(default)]
    pub execution: Execution,
    /// Where reports, checkpoints and partial results are written.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_repeats() -> usize {
    1
}

fn default_resolutions() -> Vec<usize> {
    vec![1, 2, 5, 10]
}

fn default_single_resolution() -> usize {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: String::new(),
            data: DataSource::default(),
            pipelines: vec![PipelineSpec::new(Method::Eemd, &[])],
            input_minutes: 120.0,
            target_minutes: 10.0,
            repeats: 1,
            seeds: Vec::new(),
            base_seed: 0,
            leakage: LeakageMode::default(),
            split: SplitSpec::default(),
            strides: Strides::default(),
            learner: LearnerSpec::default(),
            tuning: TuningConfig::default(),
            stacker: NeuralStackerConfig::default(),
            decomposition: DecompositionConfig::default(),
            bagging: BaggingConfig::default(),
            resolutions: default_resolutions(),
            single_resolution: 1,
            execution: Execution::default(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Full-size settings: recurrent learners, K = 25 noise trials, tuning
    /// budget 10, unit strides.
    pub fn paper(pipelines: Vec<PipelineSpec>) -> Self {
        Self { pipelines, ..Self::default() }
    }

    /// Desk-scale settings: feed-forward learners with budget-1 tuning,
    /// K = 10 noise trials, strided training windows and shorter training.
    pub fn quick(pipelines: Vec<PipelineSpec>) -> Self {
        let mut c = Self::paper(pipelines);
        c.learner = LearnerSpec {
            kind: LearnerKind::Feedforward,
            dense_units: [32, 32],
            dropouts: [0.0, 0.0],
            max_epochs: 40,
            patience: 5,
            ..LearnerSpec::default()
        };
        c.tuning = TuningConfig {
            budget: 1,
            space: SearchSpace {
                kinds: vec![LearnerKind::Feedforward],
                dense_units: vec![32],
                dropouts: vec![0.0],
                ..SearchSpace::default()
            },
        };
        c.stacker = NeuralStackerConfig { budget: 1, max_epochs: 40, patience: 5, ..NeuralStackerConfig::default() };
        c.decomposition.noise.trials = 10;
        c.strides = Strides { train: 5, validation: 1, test: 5 };
        c
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Seed of each repeat.
    pub fn run_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.repeats).map(|r| sub_seed(self.base_seed, r as u64)).collect()
        } else {
            self.seeds.clone()
        }
    }

    /// SHA-256 over the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.pipelines.is_empty() {
            return bad("at least one pipeline is required".into());
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if !self.seeds.is_empty() && self.seeds.len() != self.repeats {
            return bad(format!("{} seeds given for {} repeats", self.seeds.len(), self.repeats));
        }
        if !(self.input_minutes > 0.0 && self.target_minutes > 0.0) {
            return bad("input_minutes and target_minutes must be positive".into());
        }
        if self.strides.train == 0 || self.strides.validation == 0 || self.strides.test == 0 {
            return bad("strides must be at least 1".into());
        }
        if self.resolutions.is_empty() || self.resolutions.contains(&0) || self.single_resolution == 0 {
            return bad("resolutions must be positive".into());
        }
        if self.bagging.members == 0 || !(self.bagging.fraction > 0.0 && self.bagging.fraction <= 1.0) {
            return bad("bagging needs members >= 1 and fraction in (0, 1]".into());
        }
        if self.decomposition.top_m == 0 {
            return bad("top_m must be at least 1".into());
        }
        if self.tuning.budget == 0 {
            return bad("tuning budget must be at least 1".into());
        }
        if let DataSource::Synthetic(s) = &self.data {
            s.validate()?;
        }
        self.split.validate()?;
        self.learner.validate()?;
        self.tuning.space.validate()?;
        self.decomposition.sift.validate()?;
        self.decomposition.noise.validate()?;
        for p in &self.pipelines {
            for agg in p.resolved_aggregations().into_iter().flatten() {
                check_pairing(p.method, agg, self.leakage)?;
            }
            if p.aggregations.contains(&AggregationKind::Neural) {
                self.stacker.validate()?;
            }
        }
        Ok(())
    }
}

/// Baselines follow the construction of each ensemble: members trained on
/// resampled or re-aggregated copies of the same target are averaged, while
/// decomposition components partition the target and are summed. Stackers
/// apply to every method.
pub fn check_pairing(method: Method, agg: AggregationKind, leakage: LeakageMode) -> Result<()> {
    let decomposition = method.decomposition().is_some();
    let causal = leakage == LeakageMode::StrictCausal;
    let reason = match (agg, method) {
        (AggregationKind::Sum, _) if !decomposition => {
            "sum aggregation is the baseline for decomposition methods only; its components add up to the target"
        }
        (AggregationKind::Sum, _) if causal => {
            "sum aggregation is invalid under strict_causal leakage: every component learner predicts the whole target"
        }
        (AggregationKind::Mean, Method::Single) => "the single learner has nothing to average",
        (AggregationKind::Mean, _) if decomposition && !causal => {
            "mean aggregation is the baseline for bagging and multi-resolution only; decomposition components are summed"
        }
        _ => return Ok(()),
    };
    Err(Error::InvalidConfig(format!("{} + {}: {reason}", method.name(), agg.name())))
}
