use super::{sample_std, white_noise, NoiseConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::signal::emd::{emd, first_imf, is_final_residue, peak_magnitude, MIN_EMD_LEN};
use crate::signal::extrema::scan_extrema;
use crate::signal::{Decomposition, DecompositionDiagnostics, DecompositionMethod, SiftConfig};

/// Mean of the available terms, or `None` when no trial contributed.
fn mean_of(terms: Vec<Option<Vec<f64>>>, len: usize) -> (Option<Vec<f64>>, usize) {
    let mut acc = vec![0.0; len];
    let mut used = 0usize;
    for term in terms.iter().flatten() {
        for (a, v) in acc.iter_mut().zip(term) {
            *a += v;
        }
        used += 1;
    }
    let dropped = terms.len() - used;
    if used == 0 {
        return (None, dropped);
    }
    acc.iter_mut().for_each(|a| *a /= used as f64);
    (Some(acc), dropped)
}

/// CEEMDAN with adaptive noise.
///
/// Stage 0 averages the first IMF of `values + β_0 ω^k`. Stage `m` averages
/// `E_1(r_m + β_m E_m(ω^k))`, where `E_m` is the `m`-th EMD mode of the
/// unit noise `ω^k` and `β_m = ε_m * std(r_m)`. Trials whose noise has no
/// `m`-th mode are left out of that stage's mean; a stage where every trial
/// is left out ends the decomposition and is recorded as a stage collapse.
/// The residue is the last `r_m`, so the modes telescope back to `values`.
pub fn ceemdan(values: &[f64], noise: &NoiseConfig, sift: &SiftConfig, exec: Execution) -> Result<Decomposition> {
    let n = values.len();
    if n < MIN_EMD_LEN {
        return Err(Error::SeriesTooShort { required: MIN_EMD_LEN, actual: n });
    }
    noise.validate()?;
    sift.validate()?;
    let scale = peak_magnitude(values);
    let mut diagnostics = DecompositionDiagnostics { trials: noise.trials, ..Default::default() };
    let mut residue = values.to_vec();
    let mut imfs: Vec<Vec<f64>> = Vec::new();
    if is_final_residue(&residue, &scan_extrema(&residue), scale) {
        return Ok(Decomposition { imfs, residue, method: DecompositionMethod::Ceemdan, diagnostics });
    }

    let noise_modes: Vec<(Vec<f64>, Vec<Vec<f64>>)> = exec.try_map(noise.trials, |k| {
        let w = white_noise(noise.seed, k, n);
        let modes = emd(&w, sift)?.imfs;
        Ok::<_, Error>((w, modes))
    })?;

    while imfs.len() < sift.max_imfs {
        let stage = imfs.len();
        let beta = noise.stage_epsilon(stage) * sample_std(&residue);
        let r = &residue;
        let terms = exec.try_map(noise.trials, |k| {
            let (w, modes) = &noise_modes[k];
            let perturbation = if stage == 0 { Some(w) } else { modes.get(stage - 1) };
            match perturbation {
                None => Ok(None),
                Some(p) => {
                    let x: Vec<f64> = r.iter().zip(p).map(|(a, b)| a + beta * b).collect();
                    first_imf(&x, sift)
                }
            }
        })?;
        let (mean, dropped) = mean_of(terms, n);
        if stage > 0 {
            diagnostics.dropped_trial_terms.push(dropped);
        }
        let Some(imf) = mean else {
            diagnostics.stage_collapse = Some(stage);
            break;
        };
        for (r, v) in residue.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(imf);
        if is_final_residue(&residue, &scan_extrema(&residue), scale) {
            break;
        }
    }
    Ok(Decomposition { imfs, residue, method: DecompositionMethod::Ceemdan, diagnostics })
}
