//! Metrics reports and their text, CSV and JSON renderings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::ensemble::StageTimings;
use super::metrics::mark_significant;
use crate::aggregation::AggregationKind;
use crate::error::{Error, Result};
use crate::pipeline::LeakageMode;

pub const SIGNIFICANCE_TEST: &str = "paired two-sided Wilcoxon signed-rank test on per-run RMSE, alpha = 0.05";

pub fn pipeline_label(method: Method, aggregation: Option<AggregationKind>) -> String {
    match aggregation {
        Some(a) => format!("{}+{}", method.name(), a.name()),
        None => method.name().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub site: String,
    pub pipeline: String,
    pub method: Method,
    pub aggregation: Option<AggregationKind>,
    pub repeat: usize,
    pub seed: u64,
    pub rmse: f64,
    pub test_windows: usize,
    /// Decompose and train stages are shared by every aggregation of one
    /// pipeline and repeat.
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub site: String,
    pub pipeline: String,
    pub runs: usize,
    pub mean_rmse: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std_rmse: f64,
    /// `None` when there are too few runs to test.
    pub significant: Option<bool>,
    pub mean_timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub site: String,
    pub method: Method,
    pub repeat: usize,
    pub median_imfs: f64,
    pub zero_filled_windows: usize,
    pub dropped_windows: usize,
    /// Stacker meta columns, member-major then step.
    pub meta_members: usize,
    pub meta_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub name: String,
    pub config_hash: String,
    pub leakage: LeakageMode,
    pub seeds: Vec<u64>,
    pub significance_test: String,
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<Summary>,
    pub diagnostics: Vec<Diagnostics>,
    /// `split:stage` pairs that read target values, in first-read order.
    pub target_access: Vec<String>,
    pub complete: bool,
    pub failure: Option<String>,
}

impl MetricsReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema_version: super::config::SCHEMA_VERSION,
            name: config.name.clone(),
            config_hash: config.hash(),
            leakage: config.leakage,
            seeds: config.run_seeds(),
            significance_test: SIGNIFICANCE_TEST.to_string(),
            runs: Vec::new(),
            summaries: Vec::new(),
            diagnostics: Vec::new(),
            target_access: Vec::new(),
            complete: false,
            failure: None,
        }
    }

    /// Per-run RMSEs of `pipeline` at `site`, in repeat order.
    pub fn rmses(&self, site: &str, pipeline: &str) -> Vec<f64> {
        let mut runs: Vec<&RunRecord> = self.runs.iter().filter(|r| r.site == site && r.pipeline == pipeline).collect();
        runs.sort_by_key(|r| r.repeat);
        runs.iter().map(|r| r.rmse).collect()
    }

    /// Rebuilds the summaries from the runs and marks significance per
    /// site. Marks are left empty when the runs do not support a test.
    pub fn summarise(&mut self) {
        let mut keys: Vec<(String, String)> = Vec::new();
        for r in &self.runs {
            let k = (r.site.clone(), r.pipeline.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        self.summaries = keys
            .iter()
            .map(|(site, pipeline)| {
                let runs: Vec<&RunRecord> = self.runs.iter().filter(|r| &r.site == site && &r.pipeline == pipeline).collect();
                let n = runs.len() as f64;
                let mean = runs.iter().map(|r| r.rmse).sum::<f64>() / n;
                let var = if runs.len() > 1 {
                    runs.iter().map(|r| (r.rmse - mean).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                let mut t = StageTimings::default();
                for r in &runs {
                    t.decompose += r.timings.decompose / n;
                    t.train += r.timings.train / n;
                    t.aggregate += r.timings.aggregate / n;
                    t.evaluate += r.timings.evaluate / n;
                    t.total += r.timings.total / n;
                }
                Summary {
                    site: site.clone(),
                    pipeline: pipeline.clone(),
                    runs: runs.len(),
                    mean_rmse: mean,
                    std_rmse: var.sqrt(),
                    significant: None,
                    mean_timings: t,
                }
            })
            .collect();
        let mut sites: Vec<String> = keys.iter().map(|k| k.0.clone()).collect();
        sites.dedup();
        for site in sites {
            let idx: Vec<usize> = (0..self.summaries.len()).filter(|&i| self.summaries[i].site == site).collect();
            let runs: Vec<Vec<f64>> = idx.iter().map(|&i| self.rmses(&site, &self.summaries[i].pipeline)).collect();
            if let Ok(marks) = mark_significant(&runs) {
                for (i, m) in idx.into_iter().zip(marks) {
                    self.summaries[i].significant = Some(m);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" | "text" => Ok(Self::Table),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::InvalidConfig(format!("unknown report format `{s}`"))),
        }
    }
}

/// One row of the metrics CSV. Timings are left out so identical runs give
/// identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub site: String,
    pub pipeline: String,
    pub method: Method,
    pub aggregation: Option<AggregationKind>,
    pub leakage: LeakageMode,
    pub repeat: usize,
    pub seed: u64,
    pub rmse: f64,
    pub test_windows: usize,
}

pub fn metrics_rows(report: &MetricsReport) -> Vec<MetricsRow> {
    report
        .runs
        .iter()
        .map(|r| MetricsRow {
            site: r.site.clone(),
            pipeline: r.pipeline.clone(),
            method: r.method,
            aggregation: r.aggregation,
            leakage: report.leakage,
            repeat: r.repeat,
            seed: r.seed,
            rmse: r.rmse,
            test_windows: r.test_windows,
        })
        .collect()
}

const CSV_HEADER: [&str; 9] = ["site", "pipeline", "method", "aggregation", "leakage", "repeat", "seed", "rmse", "test_windows"];

fn render_csv(report: &MetricsReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in metrics_rows(report) {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn render_table(report: &MetricsReport) -> String {
    let mut out = String::new();
    let title = if report.name.is_empty() { "experiment" } else { &report.name };
    let _ = writeln!(out, "{title} (config {})", &report.config_hash[..12.min(report.config_hash.len())]);
    let width = report.summaries.iter().map(|s| s.pipeline.len()).max().unwrap_or(8).max(8);
    let _ = writeln!(
        out,
        "{:<12} {:<width$} {:>4} {:>12} {:>12} {:>10} {:>10}",
        "site", "pipeline", "runs", "mean_rmse", "std_rmse", "decomp_min", "train_min"
    );
    for s in &report.summaries {
        let mark = if s.significant == Some(true) { " *" } else { "" };
        let _ = writeln!(
            out,
            "{:<12} {:<width$} {:>4} {:>12.4} {:>12.4} {:>10.3} {:>10.3}{mark}",
            s.site, s.pipeline, s.runs, s.mean_rmse, s.std_rmse, s.mean_timings.decompose, s.mean_timings.train
        );
    }
    let _ = writeln!(out, "leakage mode: {}", report.leakage.name());
    let _ = writeln!(out, "* best, or not significantly worse than the best ({SIGNIFICANCE_TEST})");
    if !report.complete {
        let _ = writeln!(out, "INCOMPLETE: {}", report.failure.as_deref().unwrap_or("run aborted"));
    }
    out
}

pub fn render_report(report: &MetricsReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Table => Ok(render_table(report)),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
    }
}

pub fn emit_report(report: &MetricsReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = render_report(report, format)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_report(path: &Path) -> Result<MetricsReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
