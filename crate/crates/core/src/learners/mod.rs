//! Base forecasters: closed-form linear, feed-forward and recurrent networks.

mod adam;
mod checkpoint;
pub mod nn;
mod train;
mod tune;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LinearFit;
use crate::pipeline::WindowPair;

pub use adam::Adam;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use nn::{Architecture, Network, HEAD_UNITS};
pub use train::{fit, train_network, EpochRecord, TrainedNetwork, TrainingLog, TrainingSchedule};
pub use tune::{tune, SearchSpace, TuneOutcome, TuneTrial, DROPOUT_CHOICES, UNIT_CHOICES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Linear,
    Feedforward,
    Recurrent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub recurrent_units: usize,
    pub dense_units: [usize; 2],
    pub dropouts: [f64; 2],
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for LearnerSpec {
    fn default() -> Self {
        Self {
            kind: LearnerKind::Recurrent,
            recurrent_units: 32,
            dense_units: [32, 32],
            dropouts: [0.1, 0.1],
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 100,
            patience: 10,
            seed: 0,
        }
    }
}

impl LearnerSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.kind == LearnerKind::Linear {
            return Ok(());
        }
        if self.dense_units.contains(&0) || (self.kind == LearnerKind::Recurrent && self.recurrent_units == 0) {
            return bad("layer widths must be positive");
        }
        if self.dropouts.iter().any(|d| !(0.0..1.0).contains(d)) {
            return bad("dropout rates must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) || self.batch_size == 0 {
            return bad("learning rate and batch size must be positive");
        }
        if self.max_epochs == 0 || self.patience >= self.max_epochs {
            return bad("need max_epochs >= 1 and patience < max_epochs");
        }
        Ok(())
    }

    pub fn architecture(&self, input_len: usize, output_len: usize) -> Architecture {
        let recurrent = (self.kind == LearnerKind::Recurrent).then_some(self.recurrent_units);
        Architecture::base(input_len, output_len, recurrent, self.dense_units, self.dropouts)
    }

    /// Trainable parameters for the given shape.
    pub fn param_count(&self, input_len: usize, output_len: usize) -> usize {
        match self.kind {
            LearnerKind::Linear => (input_len + 1) * output_len,
            _ => self.architecture(input_len, output_len).param_count(),
        }
    }
}

/// Supervised samples with equal-length inputs and equal-length targets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::ShapeMismatch { expected: inputs.len(), actual: targets.len() });
        }
        let d = Self { inputs, targets };
        if let (Some(x), Some(y)) = (d.inputs.first(), d.targets.first()) {
            let (nx, ny) = (x.len(), y.len());
            if let Some(r) = d.inputs.iter().find(|r| r.len() != nx) {
                return Err(Error::ShapeMismatch { expected: nx, actual: r.len() });
            }
            if let Some(r) = d.targets.iter().find(|r| r.len() != ny) {
                return Err(Error::ShapeMismatch { expected: ny, actual: r.len() });
            }
        }
        Ok(d)
    }

    pub fn from_pairs(pairs: &[WindowPair]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| p.input.clone()).collect(), pairs.iter().map(|p| p.target.clone()).collect())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_len(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn output_len(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }
}

/// Per-column z-score fitted on training data. Constant columns keep unit
/// scale going in and invert to their constant coming out, so a target with
/// no training variance is predicted exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let n = rows.len() as f64;
        let width = rows.first().map_or(0, Vec::len);
        let mean: Vec<f64> = (0..width).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let var: Vec<f64> = (0..width)
            .map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n)
            .collect();
        let constant: Vec<bool> = var.iter().map(|&v| v <= 1e-24).collect();
        let scale = var.iter().zip(&constant).map(|(v, &c)| if c { 1.0 } else { v.sqrt() }).collect();
        Self { mean, scale, constant }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        (0..row.len())
            .map(|j| if self.constant[j] { self.mean[j] } else { row[j] * self.scale[j] + self.mean[j] })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Parameters {
    Linear(LinearFit),
    Network { network: Network, x_norm: Standardizer, y_norm: Standardizer },
}

/// A trained base learner. Immutable after [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub spec: LearnerSpec,
    pub input_len: usize,
    pub output_len: usize,
    pub parameters: Parameters,
    pub log: TrainingLog,
}

impl ForecastModel {
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_len {
            return Err(Error::ShapeMismatch { expected: self.input_len, actual: input.len() });
        }
        Ok(match &self.parameters {
            Parameters::Linear(fit) => fit.predict(input),
            Parameters::Network { network, x_norm, y_norm } => y_norm.invert(&network.forward(&x_norm.apply(input))),
        })
    }

    pub fn predict_batch(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        inputs.iter().map(|x| self.predict(x)).collect()
    }

    pub fn param_count(&self) -> usize {
        self.spec.param_count(self.input_len, self.output_len)
    }
}
