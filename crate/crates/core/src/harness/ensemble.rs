//! Per-method ensemble construction: member views, training, stacking and
//! test-time evaluation.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::data::{PreparedData, WindowSet};
use super::metrics::rmse;
use crate::aggregation::{apply_stacker, fit_stacker, AggregationKind, MetaDataset, MetaLayout, Stacker};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::learners::{tune, Dataset, ForecastModel, LearnerSpec};
use crate::pipeline::{aggregate_values, bootstrap_indices, decompose_dataset, DecomposeSpec, LeakageMode, SequenceSet};
use crate::rng::{stream_seed, sub_seed};

/// Wall-clock minutes per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub decompose: f64,
    pub train: f64,
    pub aggregate: f64,
    pub evaluate: f64,
    pub total: f64,
}

impl StageTimings {
    fn add(&mut self, other: &StageTimings) {
        self.decompose += other.decompose;
        self.train += other.train;
        self.aggregate += other.aggregate;
        self.evaluate += other.evaluate;
        self.total += other.total;
    }
}

fn minutes_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() / 60.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompositionStats {
    /// IMF count per window, over every split.
    pub imf_counts: Vec<usize>,
    /// Windows given all-zero components for missing IMFs.
    pub zero_filled: usize,
    pub dropped: usize,
}

impl DecompositionStats {
    pub fn median_imfs(&self) -> f64 {
        if self.imf_counts.is_empty() {
            return 0.0;
        }
        let mut v = self.imf_counts.clone();
        v.sort_unstable();
        let n = v.len();
        if n % 2 == 1 { v[n / 2] as f64 } else { (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0 }
    }

    fn absorb(&mut self, other: DecompositionStats) {
        self.imf_counts.extend(other.imf_counts);
        self.zero_filled += other.zero_filled;
        self.dropped += other.dropped;
    }
}

/// Everything needed to forecast the test split for one method and repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedEnsemble {
    pub site: String,
    pub method: Method,
    pub seed: u64,
    pub leakage: LeakageMode,
    /// Input resolution of each member; all 1 for decomposition methods.
    pub resolutions: Vec<usize>,
    pub members: Vec<ForecastModel>,
    /// `None` is the single learner's identity combination.
    pub aggregations: Vec<Option<AggregationKind>>,
    pub stackers: Vec<Stacker>,
    pub layout: MetaLayout,
    pub stats: DecompositionStats,
}

/// Member inputs and training targets for one split.
struct SplitFeatures {
    /// `views[v][i]`: input of view `v` for kept window `i`.
    views: Vec<Vec<Vec<f64>>>,
    /// `targets[v][i]`: what a member on view `v` learns.
    targets: Vec<Vec<Vec<f64>>>,
    /// Added to every combined forecast.
    offsets: Vec<f64>,
    /// Indices into the split's windows that survived decomposition.
    kept: Vec<usize>,
    stats: DecompositionStats,
}

fn member_resolutions(config: &ExperimentConfig, method: Method) -> Vec<usize> {
    match method {
        Method::Single => vec![config.single_resolution],
        Method::Bagging => vec![1; config.bagging.members],
        Method::MultiResolution => config.resolutions.clone(),
        _ => vec![1; config.decomposition.top_m],
    }
}

/// View index each member reads.
fn member_views(config: &ExperimentConfig, method: Method) -> Vec<usize> {
    match method {
        Method::Single | Method::Bagging => vec![0; member_resolutions(config, method).len()],
        _ => (0..member_resolutions(config, method).len()).collect(),
    }
}

fn decompose_spec(config: &ExperimentConfig, method: Method, seed: u64) -> Option<DecomposeSpec> {
    let d = &config.decomposition;
    method.decomposition().map(|m| DecomposeSpec {
        method: m,
        sift: d.sift.clone(),
        noise: crate::noise::NoiseConfig { seed: stream_seed(seed, "noise"), ..d.noise.clone() },
        top_m: d.top_m,
        leakage: config.leakage,
        detrend: d.detrend,
    })
}

fn split_features(
    config: &ExperimentConfig,
    method: Method,
    seed: u64,
    windows: &WindowSet,
    stage: &str,
    exec: Execution,
) -> Result<SplitFeatures> {
    let Some(spec) = decompose_spec(config, method, seed) else {
        let mut resolutions = member_resolutions(config, method);
        if method == Method::Bagging {
            resolutions.truncate(1);
        }
        let views = resolutions
            .iter()
            .map(|&r| windows.inputs.iter().map(|x| aggregate_values(x, r)).collect())
            .collect();
        let is_test = windows.split == "test";
        let targets = if is_test {
            Vec::new()
        } else {
            let y: Vec<Vec<f64>> = windows.scalar_targets(stage).into_iter().map(|v| vec![v]).collect();
            vec![y; resolutions.len()]
        };
        return Ok(SplitFeatures {
            views,
            targets,
            offsets: vec![0.0; windows.len()],
            kept: (0..windows.len()).collect(),
            stats: DecompositionStats::default(),
        });
    };

    // Under strict-causal leakage the horizon never reaches the decomposition,
    // so test sequences carry a zero placeholder instead of reading it.
    let sequences = if windows.split == "test" && spec.leakage == LeakageMode::StrictCausal {
        windows.inputs.iter().map(|x| [x.as_slice(), &vec![0.0; windows.target_steps]].concat()).collect()
    } else {
        windows.sequences(stage)
    };
    let seqs = SequenceSet {
        input_steps: windows.input_steps,
        target_steps: windows.target_steps,
        stride: 1,
        origin: 0,
        starts: windows.positions.iter().map(|&p| p as usize).collect(),
        sequences,
    };
    let cd = decompose_dataset(&seqs, &spec, exec)?;
    let index_of: std::collections::HashMap<usize, usize> =
        seqs.starts.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let kept = cd.source_index.iter().map(|s| index_of[s]).collect();
    let offsets = (0..cd.len()).map(|i| cd.offset_sum(i)).collect();
    let stats = DecompositionStats { imf_counts: cd.imf_counts.clone(), zero_filled: cd.zero_filled(), dropped: cd.dropped.len() };
    let targets = if windows.split == "test" { Vec::new() } else { cd.targets };
    Ok(SplitFeatures { views: cd.inputs, targets, offsets, kept, stats })
}

fn predict_members(members: &[ForecastModel], views: &[usize], f: &SplitFeatures, exec: Execution) -> Result<Vec<Vec<Vec<f64>>>> {
    exec.try_map(members.len(), |k| members[k].predict_batch(&f.views[views[k]]))
}

/// Stacker targets: scalar truth minus the offset the stacker does not see.
fn meta_targets(windows: &WindowSet, f: &SplitFeatures, stage: &str) -> Vec<f64> {
    let y = windows.scalar_targets(stage);
    f.kept.iter().zip(&f.offsets).map(|(&i, o)| y[i] - o).collect()
}

/// Trains members on the train split and fits every requested stacker on
/// validation-split meta-data. Never reads test data.
pub fn train_ensemble(
    config: &ExperimentConfig,
    data: &PreparedData,
    method: Method,
    aggregations: &[Option<AggregationKind>],
    seed: u64,
) -> Result<(TrainedEnsemble, StageTimings)> {
    let exec = config.execution;
    let mut timings = StageTimings::default();
    let start = Instant::now();

    let t = Instant::now();
    let train = split_features(config, method, seed, &data.train, "features", exec)?;
    let val = split_features(config, method, seed, &data.validation, "features", exec)?;
    if method.decomposition().is_some() {
        timings.decompose = minutes_since(t);
    }

    let t = Instant::now();
    let views = member_views(config, method);
    let bags = (method == Method::Bagging).then(|| {
        bootstrap_indices(train.kept.len(), config.bagging.fraction, config.bagging.members, stream_seed(seed, "bags"))
    });
    let member_seed = stream_seed(seed, "members");
    let fitted = exec.try_map(views.len(), |k| {
        let v = views[k];
        let rows: Vec<usize> = match &bags {
            Some(b) => b[k].clone(),
            None => (0..train.kept.len()).collect(),
        };
        let tr = Dataset {
            inputs: rows.iter().map(|&i| train.views[v][i].clone()).collect(),
            targets: rows.iter().map(|&i| train.targets[v][i].clone()).collect(),
        };
        let va = Dataset { inputs: val.views[v].clone(), targets: val.targets[v].clone() };
        let s = sub_seed(member_seed, k as u64);
        let base = LearnerSpec { seed: s, ..config.learner.clone() };
        tune(&config.tuning.space, &base, config.tuning.budget, &tr, &va, s, Execution::Sequential).map(|o| o.model)
    })?;
    timings.train = minutes_since(t);

    let t = Instant::now();
    let preds = predict_members(&fitted, &views, &val, exec)?;
    let meta = MetaDataset::from_predictions(&preds, meta_targets(&data.validation, &val, "stack"))?;
    let layout = meta.layout;
    let cut = (meta.len() * 4) / 5;
    let (fit_part, hold_part) = (meta.slice(0..cut), meta.slice(cut..meta.len()));
    let stacker_seed = stream_seed(seed, "stacker");
    let mut stackers = Vec::with_capacity(aggregations.len());
    for agg in aggregations {
        let s = match agg {
            None => Stacker::Sum { layout },
            Some(k @ (AggregationKind::Mean | AggregationKind::Sum)) => Stacker::baseline(*k, layout)?,
            Some(AggregationKind::Linear) => {
                fit_stacker(AggregationKind::Linear, &meta, &hold_part.slice(0..0), &config.stacker, stacker_seed, exec)?.stacker
            }
            Some(AggregationKind::Neural) => {
                fit_stacker(AggregationKind::Neural, &fit_part, &hold_part, &config.stacker, stacker_seed, exec)?.stacker
            }
        };
        stackers.push(s);
    }
    timings.aggregate = minutes_since(t);
    timings.total = minutes_since(start);

    let mut stats = train.stats;
    stats.absorb(val.stats);
    let ensemble = TrainedEnsemble {
        site: data.site.clone(),
        method,
        seed,
        leakage: config.leakage,
        resolutions: member_resolutions(config, method),
        members: fitted,
        aggregations: aggregations.to_vec(),
        stackers,
        layout,
        stats,
    };
    Ok((ensemble, timings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub aggregation: Option<AggregationKind>,
    pub rmse: f64,
    pub windows: usize,
}

/// Forecasts the test split and scores every aggregation of the ensemble.
pub fn evaluate_ensemble(
    config: &ExperimentConfig,
    data: &PreparedData,
    ensemble: &TrainedEnsemble,
) -> Result<(Vec<Evaluation>, StageTimings, DecompositionStats)> {
    let exec = config.execution;
    let mut timings = StageTimings::default();
    let start = Instant::now();
    let method = ensemble.method;
    if ensemble.members.len() != member_views(config, method).len() {
        return Err(Error::ShapeMismatch { expected: member_views(config, method).len(), actual: ensemble.members.len() });
    }

    let t = Instant::now();
    let test = split_features(config, method, ensemble.seed, &data.test, "decompose", exec)?;
    if method.decomposition().is_some() {
        timings.decompose = minutes_since(t);
    }

    let t = Instant::now();
    let preds = predict_members(&ensemble.members, &member_views(config, method), &test, exec)?;
    let meta = MetaDataset::from_predictions(&preds, vec![0.0; test.kept.len()])?;
    let combined: Vec<Vec<f64>> = ensemble
        .stackers
        .iter()
        .map(|s| {
            meta.features
                .iter()
                .zip(&test.offsets)
                .map(|(row, o)| apply_stacker(s, row).map(|p| p + o))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    timings.aggregate = minutes_since(t);

    let t = Instant::now();
    let truth_all = data.test.scalar_targets("evaluate");
    let truth: Vec<f64> = test.kept.iter().map(|&i| truth_all[i]).collect();
    let evals = ensemble
        .aggregations
        .iter()
        .zip(&combined)
        .map(|(agg, pred)| Ok(Evaluation { aggregation: *agg, rmse: rmse(pred, &truth)?, windows: truth.len() }))
        .collect::<Result<Vec<_>>>()?;
    timings.evaluate = minutes_since(t);
    timings.total = minutes_since(start);
    Ok((evals, timings, test.stats))
}

/// Train then evaluate, with stage timings summed over both phases.
pub fn run_pipeline(
    config: &ExperimentConfig,
    data: &PreparedData,
    method: Method,
    aggregations: &[Option<AggregationKind>],
    seed: u64,
) -> Result<(TrainedEnsemble, Vec<Evaluation>, StageTimings)> {
    let (mut ensemble, mut timings) = train_ensemble(config, data, method, aggregations, seed)?;
    let (evals, t, stats) = evaluate_ensemble(config, data, &ensemble)?;
    timings.add(&t);
    ensemble.stats.absorb(stats);
    Ok((ensemble, evals, timings))
}
