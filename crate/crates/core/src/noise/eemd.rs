use super::{align_trials, sample_std, white_noise, NoiseConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::signal::emd::{emd, MIN_EMD_LEN};
use crate::signal::{Decomposition, DecompositionDiagnostics, DecompositionMethod, SiftConfig};

/// Ensemble EMD: the trial-mean of index-aligned IMFs of `K` noise-added
/// copies of `values`. Noise is `epsilon * std(values) * N(0, 1)`.
///
/// The residue is `values - Σ mean IMFs`, so reconstruction is exact by
/// definition while the mean IMFs alone retain averaged noise.
pub fn eemd(values: &[f64], noise: &NoiseConfig, sift: &SiftConfig, exec: Execution) -> Result<Decomposition> {
    if values.len() < MIN_EMD_LEN {
        return Err(Error::SeriesTooShort { required: MIN_EMD_LEN, actual: values.len() });
    }
    noise.validate()?;
    sift.validate()?;
    let amp = noise.epsilon * sample_std(values);
    let trials = exec.try_map(noise.trials, |k| {
        let w = white_noise(noise.seed, k, values.len());
        let noisy: Vec<f64> = values.iter().zip(&w).map(|(s, w)| s + amp * w).collect();
        emd(&noisy, sift).map(|d| d.imfs)
    })?;
    let imfs = align_trials(&trials).mean();
    let mut residue = values.to_vec();
    for imf in &imfs {
        for (r, v) in residue.iter_mut().zip(imf) {
            *r -= v;
        }
    }
    Ok(Decomposition {
        imfs,
        residue,
        method: DecompositionMethod::Eemd,
        diagnostics: DecompositionDiagnostics { trials: noise.trials, ..Default::default() },
    })
}
