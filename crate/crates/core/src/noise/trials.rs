use serde::{Deserialize, Serialize};

/// Per-trial IMFs aligned by extraction index into a `K x M x T` array.
/// Trials with fewer than `M` modes are padded with exact zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMatrix {
    pub trials: usize,
    pub modes: usize,
    pub len: usize,
    data: Vec<f64>,
}

impl TrialMatrix {
    pub fn get(&self, trial: usize, mode: usize, t: usize) -> f64 {
        self.data[(trial * self.modes + mode) * self.len + t]
    }

    pub fn row(&self, trial: usize, mode: usize) -> &[f64] {
        let start = (trial * self.modes + mode) * self.len;
        &self.data[start..start + self.len]
    }

    /// Mean over the trial axis, `K` in the denominator for every mode.
    pub fn mean(&self) -> Vec<Vec<f64>> {
        let k = self.trials as f64;
        (0..self.modes)
            .map(|m| {
                let mut acc = vec![0.0; self.len];
                for trial in 0..self.trials {
                    for (a, v) in acc.iter_mut().zip(self.row(trial, m)) {
                        *a += v;
                    }
                }
                acc.iter_mut().for_each(|a| *a /= k);
                acc
            })
            .collect()
    }
}

/// Aligns per-trial IMF lists by index, zero-padding short trials.
///
/// `len` is taken from the first non-empty IMF; every IMF must share it.
pub fn align_trials(trials: &[Vec<Vec<f64>>]) -> TrialMatrix {
    let modes = trials.iter().map(Vec::len).max().unwrap_or(0);
    let len = trials.iter().flatten().map(Vec::len).next().unwrap_or(0);
    let mut data = vec![0.0; trials.len() * modes * len];
    for (k, imfs) in trials.iter().enumerate() {
        for (m, imf) in imfs.iter().enumerate() {
            assert_eq!(imf.len(), len, "trial {k} mode {m} has a different length");
            let start = (k * modes + m) * len;
            data[start..start + len].copy_from_slice(imf);
        }
    }
    TrialMatrix { trials: trials.len(), modes, len, data }
}
