//! Experiment harness: configuration, repeated seeded runs, RMSE,
//! significance marking, timing and reports.

mod config;
mod data;
mod ensemble;
mod metrics;
mod report;
mod run;

pub use config::{
    check_pairing, BaggingConfig, DataSource, DecompositionConfig, ExperimentConfig, Method, PipelineSpec, Strides,
    TuningConfig, SCHEMA_VERSION,
};
pub use data::{load_series, prepare_data, site_names, split_pieces, AccessLog, Guarded, PreparedData, WindowSet};
pub use ensemble::{
    evaluate_ensemble, run_pipeline, train_ensemble, DecompositionStats, Evaluation, StageTimings, TrainedEnsemble,
};
pub use metrics::{mark_significant, rmse, wilcoxon_signed_rank, ALPHA, MIN_RUNS};
pub use report::{
    emit_report, load_report, metrics_rows, parse_metrics_csv, pipeline_label, render_report, Diagnostics,
    MetricsReport, MetricsRow, ReportFormat, RunRecord, Summary, SIGNIFICANCE_TEST,
};
pub use run::{ensemble_path, persist_report, run_experiment, timing_profile, MethodTiming, ENSEMBLE_FORMAT};
