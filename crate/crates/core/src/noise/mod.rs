//! Noise-assisted decompositions: ensemble EMD and CEEMDAN.

mod ceemdan;
mod eemd;
mod trials;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use ceemdan::ceemdan;
pub use eemd::eemd;
pub use trials::{align_trials, TrialMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Number of noise realisations `K`.
    pub trials: usize,
    /// Noise amplitude relative to the standard deviation of the series
    /// being perturbed.
    pub epsilon: f64,
    /// CEEMDAN per-stage coefficients `ε_0, ε_1, ...`; stages past the end
    /// reuse the last entry, and an empty schedule means constant `epsilon`.
    pub schedule: Vec<f64>,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { trials: 25, epsilon: 0.2, schedule: Vec::new(), seed: 0 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("noise trials must be at least 1".into()));
        }
        let positive = |e: f64| e > 0.0 && e.is_finite();
        if !positive(self.epsilon) || !self.schedule.iter().all(|&e| positive(e)) {
            return Err(Error::InvalidConfig("noise coefficients must be positive".into()));
        }
        Ok(())
    }

    /// Coefficient used at CEEMDAN stage `stage` (0-based).
    pub fn stage_epsilon(&self, stage: usize) -> f64 {
        match self.schedule.last() {
            None => self.epsilon,
            Some(&last) => self.schedule.get(stage).copied().unwrap_or(last),
        }
    }
}

/// Unit-variance Gaussian noise for trial `trial`, drawn from a sub-seed of
/// `seed` so every trial is reproducible on its own.
pub fn white_noise(seed: u64, trial: usize, len: usize) -> Vec<f64> {
    let mut rng = rng::rng_from(rng::sub_seed(seed, trial as u64));
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Sample standard deviation (`n - 1` denominator); zero for a single sample.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}
