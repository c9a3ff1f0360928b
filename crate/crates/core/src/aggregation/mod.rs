//! Final combination of base-learner forecasts: mean/sum baselines and
//! stackers trained on out-of-sample meta-data.

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::learners::{
    train_network, Architecture, Dataset, Network, Standardizer, TrainingSchedule, DROPOUT_CHOICES,
};
use crate::linalg::{ridge_fit_scalar, LinearFit, DEFAULT_RIDGE};
use crate::rng::{rng_from, sub_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationKind {
    Mean,
    Sum,
    Linear,
    Neural,
}

impl AggregationKind {
    pub const ALL: [AggregationKind; 4] = [Self::Mean, Self::Sum, Self::Linear, Self::Neural];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::Sum => "sum",
            Self::Linear => "linear",
            Self::Neural => "neural",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Self::Mean | Self::Sum)
    }
}

impl std::str::FromStr for AggregationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown aggregation `{s}`")))
    }
}

/// Elementwise mean or sum of member predictions.
pub fn aggregate_baseline(members: &[Vec<f64>], kind: AggregationKind) -> Result<Vec<f64>> {
    let first = members.first().ok_or(Error::EmptyInput)?;
    if let Some(bad) = members.iter().find(|m| m.len() != first.len()) {
        return Err(Error::ShapeMismatch { expected: first.len(), actual: bad.len() });
    }
    let mut out = vec![0.0; first.len()];
    for m in members {
        out.iter_mut().zip(m).for_each(|(o, v)| *o += v);
    }
    match kind {
        AggregationKind::Sum => {}
        AggregationKind::Mean => out.iter_mut().for_each(|o| *o /= members.len() as f64),
        other => return Err(Error::InvalidConfig(format!("`{}` is not a baseline aggregation", other.name()))),
    }
    Ok(out)
}

/// Meta column `member * steps + step` holds `member`'s forecast for `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaLayout {
    pub members: usize,
    pub steps: usize,
}

impl MetaLayout {
    pub fn width(&self) -> usize {
        self.members * self.steps
    }

    pub fn column(&self, member: usize, step: usize) -> usize {
        member * self.steps + step
    }
}

/// Base-learner forecasts flattened member-major, then step, one row per
/// window, with the scalar target of each window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDataset {
    pub layout: MetaLayout,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl MetaDataset {
    /// `predictions[member][window]` is that member's forecast vector.
    pub fn from_predictions(predictions: &[Vec<Vec<f64>>], targets: Vec<f64>) -> Result<Self> {
        let members = predictions.len();
        let rows = targets.len();
        let steps = predictions.first().and_then(|p| p.first()).map_or(0, Vec::len);
        if members == 0 || steps == 0 {
            return Err(Error::EmptyInput);
        }
        let layout = MetaLayout { members, steps };
        let mut features = vec![Vec::with_capacity(layout.width()); rows];
        for p in predictions {
            if p.len() != rows {
                return Err(Error::ShapeMismatch { expected: rows, actual: p.len() });
            }
            for (row, f) in features.iter_mut().zip(p) {
                if f.len() != steps {
                    return Err(Error::ShapeMismatch { expected: steps, actual: f.len() });
                }
                row.extend_from_slice(f);
            }
        }
        Ok(Self { layout, features, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Rows `range`, same layout.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            layout: self.layout,
            features: self.features[range.clone()].to_vec(),
            targets: self.targets[range].to_vec(),
        }
    }
}

/// Search space and training settings for the neural stacker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeuralStackerConfig {
    pub widths: Vec<usize>,
    pub dropouts: Vec<f64>,
    pub budget: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
}

pub const STACKER_WIDTHS: [usize; 4] = [8, 16, 32, 64];

impl Default for NeuralStackerConfig {
    fn default() -> Self {
        Self {
            widths: STACKER_WIDTHS.to_vec(),
            dropouts: DROPOUT_CHOICES.to_vec(),
            budget: 10,
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 100,
            patience: 10,
        }
    }
}

impl NeuralStackerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.widths.is_empty() || self.dropouts.is_empty() || self.budget == 0 {
            return Err(Error::InvalidConfig("neural stacker needs widths, dropouts and a budget of at least 1".into()));
        }
        if self.dropouts.iter().any(|d| !(0.0..1.0).contains(d)) || self.widths.contains(&0) {
            return Err(Error::InvalidConfig("neural stacker widths must be positive and dropouts in [0, 1)".into()));
        }
        if self.max_epochs == 0 || self.patience >= self.max_epochs || self.batch_size == 0 {
            return Err(Error::InvalidConfig("neural stacker needs max_epochs >= 1, patience < max_epochs".into()));
        }
        Ok(())
    }

    fn schedule(&self, seed: u64) -> TrainingSchedule {
        TrainingSchedule {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed,
        }
    }
}

/// Dense stack `dense(w1) -> dropout -> dense(w2) -> dropout -> dense(1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralStacker {
    pub widths: [usize; 2],
    pub dropouts: [f64; 2],
    pub network: Network,
    pub x_norm: Standardizer,
    pub y_norm: Standardizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stacker {
    Mean { layout: MetaLayout },
    Sum { layout: MetaLayout },
    Linear { layout: MetaLayout, fit: LinearFit },
    Neural { layout: MetaLayout, model: Box<NeuralStacker> },
}

impl Stacker {
    pub fn baseline(kind: AggregationKind, layout: MetaLayout) -> Result<Self> {
        match kind {
            AggregationKind::Mean => Ok(Self::Mean { layout }),
            AggregationKind::Sum => Ok(Self::Sum { layout }),
            other => Err(Error::InvalidConfig(format!("`{}` must be fitted", other.name()))),
        }
    }

    pub fn kind(&self) -> AggregationKind {
        match self {
            Self::Mean { .. } => AggregationKind::Mean,
            Self::Sum { .. } => AggregationKind::Sum,
            Self::Linear { .. } => AggregationKind::Linear,
            Self::Neural { .. } => AggregationKind::Neural,
        }
    }

    pub fn layout(&self) -> MetaLayout {
        match self {
            Self::Mean { layout } | Self::Sum { layout } | Self::Linear { layout, .. } | Self::Neural { layout, .. } => {
                *layout
            }
        }
    }

    /// Rank-deficient linear fits use the minimum-norm solution.
    pub fn singular(&self) -> bool {
        matches!(self, Self::Linear { fit, .. } if fit.singular)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackerTrial {
    pub widths: [usize; 2],
    pub dropouts: [f64; 2],
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedStacker {
    pub stacker: Stacker,
    /// Neural search trials; empty for the other kinds.
    pub trials: Vec<StackerTrial>,
}

fn mse(stacker: &Stacker, meta: &MetaDataset) -> f64 {
    let total: f64 = meta
        .features
        .iter()
        .zip(&meta.targets)
        .map(|(row, y)| apply_stacker(stacker, row).map_or(f64::INFINITY, |p| (p - y).powi(2)))
        .sum();
    total / meta.len() as f64
}

/// Fits a stacker on `meta`. The neural kind tunes on `val` (falling back to
/// `meta` when empty); the linear kind ignores `val`.
pub fn fit_stacker(
    kind: AggregationKind,
    meta: &MetaDataset,
    val: &MetaDataset,
    config: &NeuralStackerConfig,
    seed: u64,
    exec: Execution,
) -> Result<FittedStacker> {
    let layout = meta.layout;
    if val.layout != layout && !val.is_empty() {
        return Err(Error::ShapeMismatch { expected: layout.width(), actual: val.layout.width() });
    }
    match kind {
        AggregationKind::Mean | AggregationKind::Sum => {
            Ok(FittedStacker { stacker: Stacker::baseline(kind, layout)?, trials: Vec::new() })
        }
        AggregationKind::Linear => {
            let required = layout.width() + 1;
            if meta.len() < required {
                return Err(Error::TooFewRows { required, actual: meta.len() });
            }
            let fit = ridge_fit_scalar(&meta.features, &meta.targets, DEFAULT_RIDGE)?;
            Ok(FittedStacker { stacker: Stacker::Linear { layout, fit }, trials: Vec::new() })
        }
        AggregationKind::Neural => {
            config.validate()?;
            if meta.is_empty() {
                return Err(Error::EmptyInput);
            }
            let as_dataset = |m: &MetaDataset| Dataset {
                inputs: m.features.clone(),
                targets: m.targets.iter().map(|&y| vec![y]).collect(),
            };
            let (train, held) = (as_dataset(meta), as_dataset(val));
            let scored = if val.is_empty() { meta } else { val };
            let outcomes = exec.map(config.budget, |t| {
                let mut rng = rng_from(sub_seed(seed, t as u64));
                let widths = [*config.widths.choose(&mut rng).unwrap(), *config.widths.choose(&mut rng).unwrap()];
                let dropouts = [*config.dropouts.choose(&mut rng).unwrap(), *config.dropouts.choose(&mut rng).unwrap()];
                let arch = Architecture {
                    input_len: layout.width(),
                    output_len: 1,
                    recurrent_units: None,
                    hidden: widths.to_vec(),
                    dropouts: dropouts.to_vec(),
                };
                let stacker = train_network(arch, config.schedule(sub_seed(seed, t as u64)), &train, &held).map(|t| {
                    Stacker::Neural {
                        layout,
                        model: Box::new(NeuralStacker {
                            widths,
                            dropouts,
                            network: t.network,
                            x_norm: t.x_norm,
                            y_norm: t.y_norm,
                        }),
                    }
                });
                let loss = stacker.as_ref().map_or(f64::INFINITY, |s| mse(s, scored));
                let loss = if loss.is_nan() { f64::INFINITY } else { loss };
                (StackerTrial { widths, dropouts, val_loss: loss }, stacker)
            });
            let size = |t: &StackerTrial| t.widths[0] * (layout.width() + t.widths[1]);
            let winner = (0..outcomes.len())
                .min_by(|&a, &b| {
                    let (ta, tb) = (&outcomes[a].0, &outcomes[b].0);
                    ta.val_loss.total_cmp(&tb.val_loss).then(size(ta).cmp(&size(tb))).then(a.cmp(&b))
                })
                .expect("budget >= 1");
            let trials = outcomes.iter().map(|o| o.0.clone()).collect();
            let stacker = outcomes.into_iter().nth(winner).expect("winner in range").1?;
            Ok(FittedStacker { stacker, trials })
        }
    }
}

/// Scalar forecast for one meta row.
pub fn apply_stacker(stacker: &Stacker, row: &[f64]) -> Result<f64> {
    let layout = stacker.layout();
    if row.len() != layout.width() {
        return Err(Error::ShapeMismatch { expected: layout.width(), actual: row.len() });
    }
    Ok(match stacker {
        Stacker::Sum { .. } => row.iter().sum(),
        Stacker::Mean { layout } => row.iter().sum::<f64>() / layout.members as f64,
        Stacker::Linear { fit, .. } => fit.predict(row)[0],
        Stacker::Neural { model, .. } => model.y_norm.invert(&model.network.forward(&model.x_norm.apply(row)))[0],
    })
}

pub fn apply_stacker_batch(stacker: &Stacker, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    rows.iter().map(|r| apply_stacker(stacker, r)).collect()
}
