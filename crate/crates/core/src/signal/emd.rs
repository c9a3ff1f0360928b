//! Sifting and plain empirical mode decomposition.

use serde::{Deserialize, Serialize};

use super::envelope::build_envelopes;
use super::extrema::{count_zero_crossings, scan_extrema, ExtremaSet};
use super::spline::SplineKind;
use crate::error::{Error, Result};

/// Shortest series [`emd`] accepts.
pub const MIN_EMD_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiftConfig {
    pub spline_kind: SplineKind,
    pub max_sift_iterations: usize,
    /// Largest admissible `max|mean envelope|` as a fraction of the
    /// candidate's range.
    pub mean_tolerance: f64,
    pub max_imfs: usize,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            spline_kind: SplineKind::Akima,
            max_sift_iterations: 50,
            mean_tolerance: 0.05,
            max_imfs: 12,
        }
    }
}

impl SiftConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_tolerance > 0.0 && self.mean_tolerance.is_finite()) {
            return Err(Error::InvalidConfig("mean_tolerance must be positive".into()));
        }
        if self.max_sift_iterations == 0 {
            return Err(Error::InvalidConfig("max_sift_iterations must be at least 1".into()));
        }
        if self.max_imfs == 0 {
            return Err(Error::InvalidConfig("max_imfs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMethod {
    Emd,
    Eemd,
    Ceemdan,
}

impl DecompositionMethod {
    pub fn name(self) -> &'static str {
        match self {
            DecompositionMethod::Emd => "emd",
            DecompositionMethod::Eemd => "eemd",
            DecompositionMethod::Ceemdan => "ceemdan",
        }
    }

    /// Whether `Σ imfs + residue` reproduces the input by construction of the
    /// modes themselves (EEMD only does so through its subtraction residue).
    pub fn exact_reconstruction(self) -> bool {
        !matches!(self, DecompositionMethod::Eemd)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImfDiagnostics {
    pub sift_iterations: usize,
    /// Accepted at the iteration cap or because it could no longer be sifted.
    pub force_accepted: bool,
    pub extrema: usize,
    pub zero_crossings: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDiagnostics {
    /// Per-IMF sifting record (plain EMD only).
    pub imfs: Vec<ImfDiagnostics>,
    pub trials: usize,
    /// CEEMDAN: trials whose noise had no mode at each stage.
    pub dropped_trial_terms: Vec<usize>,
    /// CEEMDAN: stage at which every noise realisation ran out of modes.
    pub stage_collapse: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Highest frequency first.
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
    pub method: DecompositionMethod,
    pub diagnostics: DecompositionDiagnostics,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.residue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residue.is_empty()
    }

    pub fn imf_count(&self) -> usize {
        self.imfs.len()
    }

    /// `Σ imfs + residue`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }
}

/// Result of checking one candidate against the two IMF conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImfCheck {
    pub is_imf: bool,
    pub extrema: usize,
    pub zero_crossings: usize,
    pub max_abs_mean: f64,
    pub range: f64,
    /// No envelope could be built; the mean envelope was taken to be the
    /// candidate itself.
    pub degenerate: bool,
}

/// Residues whose range is below this fraction of the input's peak magnitude
/// are rounding noise.
pub(crate) const FLAT_TOLERANCE: f64 = 1e-10;

pub(crate) fn peak_magnitude(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// A residue with no maximum, no minimum, or a numerically flat profile
/// cannot be sifted further.
pub(crate) fn is_final_residue(residue: &[f64], extrema: &ExtremaSet, scale: f64) -> bool {
    if extrema.maxima.is_empty() || extrema.minima.is_empty() {
        return true;
    }
    let (lo, hi) = residue
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo <= FLAT_TOLERANCE * scale
}

fn mean_envelope(values: &[f64], extrema: &ExtremaSet, config: &SiftConfig) -> Result<Vec<f64>> {
    Ok(build_envelopes(values, extrema, config)?.mean)
}

fn subtract(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// One sifting step: the series minus its mean envelope.
pub fn sift_once(values: &[f64], config: &SiftConfig) -> Result<Vec<f64>> {
    let extrema = scan_extrema(values);
    let mean = mean_envelope(values, &extrema, config)?;
    Ok(subtract(values, &mean))
}

fn check_with_mean(candidate: &[f64], config: &SiftConfig) -> (ImfCheck, Option<Vec<f64>>) {
    let extrema = scan_extrema(candidate);
    let crossings = count_zero_crossings(candidate);
    let (lo, hi) = candidate
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = if candidate.is_empty() { 0.0 } else { hi - lo };
    let mean = mean_envelope(candidate, &extrema, config).ok();
    let max_abs_mean = match &mean {
        Some(m) => m.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        None => candidate.iter().fold(0.0f64, |a, v| a.max(v.abs())),
    };
    let counts_ok = extrema.total().abs_diff(crossings) <= 1;
    let mean_ok = max_abs_mean <= config.mean_tolerance * range;
    let check = ImfCheck {
        is_imf: counts_ok && mean_ok,
        extrema: extrema.total(),
        zero_crossings: crossings,
        max_abs_mean,
        range,
        degenerate: mean.is_none(),
    };
    (check, mean)
}

/// Checks the extrema/zero-crossing balance and the mean-envelope tolerance.
pub fn is_imf(candidate: &[f64], config: &SiftConfig) -> ImfCheck {
    check_with_mean(candidate, config).0
}

/// Sifts `residual` until it passes [`is_imf`] or the iteration cap is hit.
fn extract_imf(residual: &[f64], config: &SiftConfig) -> Result<(Vec<f64>, ImfDiagnostics)> {
    let extrema = scan_extrema(residual);
    let mut mean = mean_envelope(residual, &extrema, config)?;
    let mut h = residual.to_vec();
    for iter in 1..=config.max_sift_iterations {
        let candidate = subtract(&h, &mean);
        let (check, next_mean) = check_with_mean(&candidate, config);
        let done = check.is_imf || iter == config.max_sift_iterations || next_mean.is_none();
        if done {
            let diag = ImfDiagnostics {
                sift_iterations: iter,
                force_accepted: !check.is_imf,
                extrema: check.extrema,
                zero_crossings: check.zero_crossings,
            };
            return Ok((candidate, diag));
        }
        h = candidate;
        mean = next_mean.expect("checked above");
    }
    unreachable!("max_sift_iterations >= 1")
}

/// Plain EMD: extract IMFs until the residue is final or `max_imfs` is
/// reached.
pub fn emd(values: &[f64], config: &SiftConfig) -> Result<Decomposition> {
    if values.len() < MIN_EMD_LEN {
        return Err(Error::SeriesTooShort { required: MIN_EMD_LEN, actual: values.len() });
    }
    config.validate()?;
    let scale = peak_magnitude(values);
    let mut residue = values.to_vec();
    let mut imfs = Vec::new();
    let mut diags = Vec::new();
    while imfs.len() < config.max_imfs {
        if is_final_residue(&residue, &scan_extrema(&residue), scale) {
            break;
        }
        let (imf, diag) = extract_imf(&residue, config)?;
        for (r, v) in residue.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(imf);
        diags.push(diag);
    }
    Ok(Decomposition {
        imfs,
        residue,
        method: DecompositionMethod::Emd,
        diagnostics: DecompositionDiagnostics { imfs: diags, trials: 1, ..Default::default() },
    })
}

/// First IMF only, or `None` if the series cannot be sifted at all.
pub(crate) fn first_imf(values: &[f64], config: &SiftConfig) -> Result<Option<Vec<f64>>> {
    let cfg = SiftConfig { max_imfs: 1, ..config.clone() };
    Ok(emd(values, &cfg)?.imfs.into_iter().next())
}
