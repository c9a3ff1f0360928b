use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::{fit, Dataset, ForecastModel, LearnerKind, LearnerSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::{rng_from, sub_seed};

/// Candidate values for each tunable field. Every list must be non-empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub kinds: Vec<LearnerKind>,
    pub recurrent_units: Vec<usize>,
    pub dense_units: Vec<usize>,
    pub dropouts: Vec<f64>,
}

pub const UNIT_CHOICES: [usize; 5] = [8, 16, 32, 64, 128];
pub const DROPOUT_CHOICES: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            kinds: vec![LearnerKind::Recurrent],
            recurrent_units: UNIT_CHOICES.to_vec(),
            dense_units: UNIT_CHOICES.to_vec(),
            dropouts: DROPOUT_CHOICES.to_vec(),
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() || self.recurrent_units.is_empty() || self.dense_units.is_empty() || self.dropouts.is_empty() {
            return Err(Error::InvalidConfig("search space lists must be non-empty".into()));
        }
        Ok(())
    }

    /// Draws one spec; untuned fields come from `base`.
    pub fn sample(&self, base: &LearnerSpec, seed: u64) -> LearnerSpec {
        let mut rng = rng_from(seed);
        let kind = *self.kinds.choose(&mut rng).unwrap();
        let recurrent_units = *self.recurrent_units.choose(&mut rng).unwrap();
        let dense_units = [*self.dense_units.choose(&mut rng).unwrap(), *self.dense_units.choose(&mut rng).unwrap()];
        let dropouts = [*self.dropouts.choose(&mut rng).unwrap(), *self.dropouts.choose(&mut rng).unwrap()];
        LearnerSpec { kind, recurrent_units, dense_units, dropouts, ..base.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneTrial {
    pub spec: LearnerSpec,
    /// Validation MSE in target units; infinite when training diverged.
    pub val_loss: f64,
    pub param_count: usize,
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub best: LearnerSpec,
    /// The model trained for the winning trial.
    pub model: ForecastModel,
    pub trials: Vec<TuneTrial>,
}

fn raw_mse(model: &ForecastModel, data: &Dataset) -> f64 {
    let n = (data.len() * model.output_len) as f64;
    data.inputs
        .iter()
        .zip(&data.targets)
        .map(|(x, y)| match model.predict(x) {
            Ok(p) => p.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>(),
            Err(_) => f64::INFINITY,
        })
        .sum::<f64>()
        / n
}

/// Random search over `space`. Trial `t` samples with `sub_seed(seed, t)`.
/// The lowest validation MSE wins; ties go to the smaller parameter count,
/// then the earlier trial.
pub fn tune(
    space: &SearchSpace,
    base: &LearnerSpec,
    budget: usize,
    train: &Dataset,
    val: &Dataset,
    seed: u64,
    exec: Execution,
) -> Result<TuneOutcome> {
    if budget == 0 {
        return Err(Error::InvalidConfig("tuning budget must be at least 1".into()));
    }
    space.validate()?;
    let scored = if val.is_empty() { train } else { val };
    let outcomes = exec.map(budget, |t| {
        let spec = space.sample(base, sub_seed(seed, t as u64));
        let model = fit(&spec, train, val);
        let loss = match &model {
            Ok(m) => raw_mse(m, scored),
            Err(_) => f64::INFINITY,
        };
        (spec, model, if loss.is_nan() { f64::INFINITY } else { loss })
    });
    let (input_len, output_len) = (train.input_len(), train.output_len());
    let trials: Vec<TuneTrial> = outcomes
        .iter()
        .map(|(spec, _, loss)| TuneTrial {
            spec: spec.clone(),
            val_loss: *loss,
            param_count: spec.param_count(input_len, output_len),
        })
        .collect();
    let winner = (0..budget)
        .min_by(|&a, &b| {
            let (ta, tb) = (&trials[a], &trials[b]);
            ta.val_loss
                .total_cmp(&tb.val_loss)
                .then(ta.param_count.cmp(&tb.param_count))
                .then(a.cmp(&b))
        })
        .expect("budget >= 1");
    let (best, model, _) = outcomes.into_iter().nth(winner).expect("winner index in range");
    Ok(TuneOutcome { best, model: model?, trials })
}
