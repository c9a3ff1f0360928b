use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Architecture, Dataset, ForecastModel, LearnerKind, LearnerSpec, Network, Parameters, Standardizer};
use crate::error::{Error, Result};
use crate::linalg::{ridge_fit, DEFAULT_RIDGE};
use crate::rng::{rng_from, stream_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Per-epoch losses in standardised target units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept. 0 for closed-form fits.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
}

impl TrainingLog {
    /// Running minimum of the validation loss.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.epochs
            .iter()
            .map(|e| {
                best = best.min(e.val_loss);
                best
            })
            .collect()
    }
}

/// Optimiser and stopping settings for gradient training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSchedule {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl From<&LearnerSpec> for TrainingSchedule {
    fn from(s: &LearnerSpec) -> Self {
        Self {
            learning_rate: s.learning_rate,
            batch_size: s.batch_size,
            max_epochs: s.max_epochs,
            patience: s.patience,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedNetwork {
    pub network: Network,
    pub x_norm: Standardizer,
    pub y_norm: Standardizer,
    pub log: TrainingLog,
}

fn standardize(rows: &[Vec<f64>], norm: &Standardizer) -> Vec<Vec<f64>> {
    rows.iter().map(|r| norm.apply(r)).collect()
}

fn as_slices(rows: &[Vec<f64>]) -> Vec<&[f64]> {
    rows.iter().map(Vec::as_slice).collect()
}

/// Mini-batch Adam on MSE with early stopping on validation loss. Returns the
/// parameters of the best validation epoch. An empty validation set falls
/// back to the epoch's training loss.
pub fn train_network(arch: Architecture, sched: TrainingSchedule, train: &Dataset, val: &Dataset) -> Result<TrainedNetwork> {
    let x_norm = Standardizer::fit(&train.inputs);
    let y_norm = Standardizer::fit(&train.targets);
    let xs = standardize(&train.inputs, &x_norm);
    let ys = standardize(&train.targets, &y_norm);
    let xv = standardize(&val.inputs, &x_norm);
    let yv = standardize(&val.targets, &y_norm);
    let (xv, yv) = (as_slices(&xv), as_slices(&yv));

    let mut net = Network::new(arch, stream_seed(sched.seed, "init"));
    let mut opt = super::Adam::new(net.param_count(), sched.learning_rate);
    let mut order_rng = rng_from(stream_seed(sched.seed, "shuffle"));
    let mut drop_rng = rng_from(stream_seed(sched.seed, "dropout"));
    let mut grad = vec![0.0; net.param_count()];
    let mut order: Vec<usize> = (0..xs.len()).collect();

    let mut log = TrainingLog { best_val_loss: f64::INFINITY, ..Default::default() };
    let mut best = net.params.clone();
    for epoch in 1..=sched.max_epochs {
        order.shuffle(&mut order_rng);
        let mut total = 0.0;
        for batch in order.chunks(sched.batch_size) {
            let bx: Vec<&[f64]> = batch.iter().map(|&i| xs[i].as_slice()).collect();
            let by: Vec<&[f64]> = batch.iter().map(|&i| ys[i].as_slice()).collect();
            let loss = net.loss_and_gradient(&bx, &by, Some(&mut drop_rng), &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::DivergedTraining { epoch });
            }
            total += loss * batch.len() as f64;
            opt.step(&mut net.params, &grad);
        }
        let train_loss = total / xs.len() as f64;
        let val_loss = if xv.is_empty() { train_loss } else { net.loss(&xv, &yv) };
        if !val_loss.is_finite() {
            return Err(Error::DivergedTraining { epoch });
        }
        log.epochs.push(EpochRecord { epoch, train_loss, val_loss });
        if val_loss < log.best_val_loss {
            log.best_val_loss = val_loss;
            log.best_epoch = epoch;
            best.copy_from_slice(&net.params);
        } else if epoch - log.best_epoch >= sched.patience {
            log.stopped_early = epoch < sched.max_epochs;
            break;
        }
    }
    net.params = best;
    Ok(TrainedNetwork { network: net, x_norm, y_norm, log })
}

/// Trains a base learner. Linear learners are solved in closed form.
pub fn fit(spec: &LearnerSpec, train: &Dataset, val: &Dataset) -> Result<ForecastModel> {
    if train.is_empty() {
        return Err(Error::EmptyInput);
    }
    spec.validate()?;
    let (input_len, output_len) = (train.input_len(), train.output_len());
    for d in [train, val].into_iter().filter(|d| !d.is_empty()) {
        if d.input_len() != input_len {
            return Err(Error::ShapeMismatch { expected: input_len, actual: d.input_len() });
        }
        if d.output_len() != output_len {
            return Err(Error::ShapeMismatch { expected: output_len, actual: d.output_len() });
        }
    }
    let (parameters, log) = match spec.kind {
        LearnerKind::Linear => {
            let lin = ridge_fit(&train.inputs, &train.targets, DEFAULT_RIDGE)?;
            let mse = |d: &Dataset| {
                let n = (d.len() * output_len) as f64;
                d.inputs
                    .iter()
                    .zip(&d.targets)
                    .map(|(x, y)| lin.predict(x).iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>())
                    .sum::<f64>()
                    / n
            };
            let train_loss = mse(train);
            let val_loss = if val.is_empty() { train_loss } else { mse(val) };
            if !(train_loss.is_finite() && val_loss.is_finite()) {
                return Err(Error::DivergedTraining { epoch: 0 });
            }
            let log = TrainingLog {
                epochs: vec![EpochRecord { epoch: 0, train_loss, val_loss }],
                best_epoch: 0,
                best_val_loss: val_loss,
                stopped_early: false,
            };
            (Parameters::Linear(lin), log)
        }
        _ => {
            let t = train_network(spec.architecture(input_len, output_len), spec.into(), train, val)?;
            (Parameters::Network { network: t.network, x_norm: t.x_norm, y_norm: t.y_norm }, t.log)
        }
    };
    Ok(ForecastModel { spec: spec.clone(), input_len, output_len, parameters, log })
}
