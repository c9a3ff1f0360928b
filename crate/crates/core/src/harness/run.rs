//! Repeated seeded runs, persistence and timing profiles.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method, PipelineSpec};
use super::data::{prepare_data, site_names};
use super::ensemble::{run_pipeline, StageTimings, TrainedEnsemble};
use super::report::{emit_report, pipeline_label, Diagnostics, MetricsReport, ReportFormat, RunRecord};
use crate::error::{Error, Result};
use crate::learners::save_checkpoint;

pub const ENSEMBLE_FORMAT: &str = "trained_ensemble";

/// Writes `report.json`, `metrics.csv` and `report.txt` into `dir`.
pub fn persist_report(report: &MetricsReport, dir: &Path) -> Result<()> {
    emit_report(report, ReportFormat::Json, &dir.join("report.json"))?;
    emit_report(report, ReportFormat::Csv, &dir.join("metrics.csv"))?;
    emit_report(report, ReportFormat::Table, &dir.join("report.txt"))
}

pub fn ensemble_path(dir: &Path, site: &str, method: Method, repeat: usize) -> std::path::PathBuf {
    dir.join("models").join(site).join(method.name()).join(format!("repeat_{repeat}.json"))
}

fn persist_ensemble(dir: &Path, repeat: usize, ensemble: &TrainedEnsemble) -> Result<()> {
    let path = ensemble_path(dir, &ensemble.site, ensemble.method, repeat);
    let parent = path.parent().expect("ensemble path has a parent");
    std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    save_checkpoint(&path, ENSEMBLE_FORMAT, ensemble)
}

fn run_all(config: &ExperimentConfig, report: &mut MetricsReport) -> Result<()> {
    for site in site_names(config) {
        for (repeat, &seed) in config.run_seeds().iter().enumerate() {
            let data = prepare_data(config, &site, seed)?;
            for p in &config.pipelines {
                let aggs = p.resolved_aggregations();
                let (ensemble, evals, timings) = run_pipeline(config, &data, p.method, &aggs, seed).map_err(|e| Error::RunFailed {
                    context: format!("site {site}, method {}, repeat {repeat} (seed {seed})", p.method.name()),
                    source: Box::new(e),
                })?;
                for ev in evals {
                    report.runs.push(RunRecord {
                        site: site.clone(),
                        pipeline: pipeline_label(p.method, ev.aggregation),
                        method: p.method,
                        aggregation: ev.aggregation,
                        repeat,
                        seed,
                        rmse: ev.rmse,
                        test_windows: ev.windows,
                        timings,
                    });
                }
                report.diagnostics.push(Diagnostics {
                    site: site.clone(),
                    method: p.method,
                    repeat,
                    median_imfs: ensemble.stats.median_imfs(),
                    zero_filled_windows: ensemble.stats.zero_filled,
                    dropped_windows: ensemble.stats.dropped,
                    meta_members: ensemble.layout.members,
                    meta_steps: ensemble.layout.steps,
                });
                if let Some(dir) = &config.output_dir {
                    persist_ensemble(dir, repeat, &ensemble)?;
                }
            }
            for entry in data.access.entries() {
                if !report.target_access.contains(&entry) {
                    report.target_access.push(entry);
                }
            }
        }
    }
    Ok(())
}

/// Runs every pipeline for every site and repeat.
///
/// With an `output_dir` the report, metrics CSV and trained ensembles are
/// written there. A failing repeat aborts the experiment; the runs finished
/// so far are still written, marked incomplete, before the error returns.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MetricsReport> {
    config.validate()?;
    let mut report = MetricsReport::new(config);
    let outcome = run_all(config, &mut report);
    report.complete = outcome.is_ok();
    report.failure = outcome.as_ref().err().map(ToString::to_string);
    report.summarise();
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        persist_report(&report, dir)?;
    }
    outcome.map(|_| report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: Method,
    /// One entry per profiling run.
    pub samples: Vec<StageTimings>,
    /// Median over runs, per stage.
    pub median: StageTimings,
    /// Wall clock of each whole profiling run, minutes.
    pub wall: Vec<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Stage timings of each method on the first site and seed of `config`,
/// repeated `runs` times. Only ordering between methods is meaningful.
pub fn timing_profile(config: &ExperimentConfig, methods: &[Method], runs: usize) -> Result<Vec<MethodTiming>> {
    let mut cfg = config.clone();
    cfg.pipelines = methods.iter().map(|&m| PipelineSpec::new(m, &[])).collect();
    cfg.output_dir = None;
    cfg.validate()?;
    let site = site_names(&cfg).remove(0);
    let seed = cfg.run_seeds()[0];
    let data = prepare_data(&cfg, &site, seed)?;
    methods
        .iter()
        .map(|&m| {
            let aggs = PipelineSpec::new(m, &[]).resolved_aggregations();
            let mut samples = Vec::with_capacity(runs);
            let mut wall = Vec::with_capacity(runs);
            for _ in 0..runs {
                let t = Instant::now();
                let (_, _, timings) = run_pipeline(&cfg, &data, m, &aggs, seed)?;
                wall.push(t.elapsed().as_secs_f64() / 60.0);
                samples.push(timings);
            }
            let pick = |f: fn(&StageTimings) -> f64| median(samples.iter().map(f).collect());
            let median = StageTimings {
                decompose: pick(|t| t.decompose),
                train: pick(|t| t.train),
                aggregate: pick(|t| t.aggregate),
                evaluate: pick(|t| t.evaluate),
                total: pick(|t| t.total),
            };
            Ok(MethodTiming { method: m, samples, median, wall })
        })
        .collect()
}
