use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use flowcast_core::aggregation::AggregationKind;
use flowcast_core::exec::Execution;
use flowcast_core::harness::{
    emit_report, ensemble_path, evaluate_ensemble, load_report, pipeline_label, prepare_data, render_report,
    run_experiment, site_names, timing_profile, DataSource, ExperimentConfig, Method, MetricsReport, PipelineSpec,
    ReportFormat, RunRecord, TrainedEnsemble, ENSEMBLE_FORMAT,
};
use flowcast_core::learners::load_checkpoint;
use flowcast_core::noise::NoiseConfig;
use flowcast_core::pipeline::{
    decompose_sequence, generate, ingest_csv, write_flow_csv, IngestOptions, LeakageMode, SyntheticSpec,
};
use flowcast_core::signal::{SiftConfig, TimeSeries};

#[derive(Parser)]
#[command(name = "flowcast", version, about = "Decomposition-based ensemble forecasting of traffic flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic traffic-flow series as `timestamp,flow` CSV.
    Generate(GenerateArgs),
    /// Decompose a series and dump `t, imf_1..imf_m, residue` as CSV.
    Decompose(DecomposeArgs),
    /// Run every configured pipeline and repeat, saving ensembles and reports.
    Train(TrainArgs),
    /// Score previously saved ensembles on the test split.
    Evaluate(EvaluateArgs),
    /// Re-render a saved JSON report.
    Report(ReportArgs),
    /// Per-stage wall-clock profile of each method.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 30.0)]
    days: f64,
    #[arg(long, default_value_t = 1.0)]
    interval_minutes: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Flow CSV; a synthetic series is generated when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// `emd`, `eemd` or `ceemdan`.
    #[arg(long, default_value = "eemd")]
    method: String,
    /// First sample to decompose.
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Number of samples; the rest of the series when omitted.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Noise seed; also seeds the synthetic series.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    days: f64,
    #[arg(long)]
    sequential: bool,
    #[arg(long, short)]
    out: PathBuf,
}

/// Experiment settings: a TOML file and/or a built-in profile, then
/// individual overrides.
#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `quick` or `paper`; ignored when `--config` is given.
    #[arg(long, default_value = "quick")]
    profile: String,
    /// Replaces the configured pipelines; repeatable.
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Aggregations evaluated for every `--method`; repeatable.
    #[arg(long = "aggregation")]
    aggregations: Vec<String>,
    /// Flow CSV replacing the synthetic source.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Length of the synthetic series.
    #[arg(long)]
    days: Option<f64>,
    #[arg(long)]
    input_minutes: Option<f64>,
    #[arg(long)]
    target_minutes: Option<f64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Explicit per-repeat seeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// `paper_faithful` or `strict_causal`.
    #[arg(long)]
    leakage: Option<String>,
    /// Noise realisations per window for EEMD and CEEMDAN.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory for reports and ensembles.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory a previous `train` wrote; its `config.toml` is used unless
    /// `--config` is given.
    #[arg(long)]
    models: PathBuf,
    /// Where to write the evaluation report; defaults to `<models>/evaluation`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args)]
struct ReportArgs {
    /// A `report.json` written by `train` or `evaluate`.
    input: PathBuf,
    #[arg(long, default_value = "table")]
    format: String,
    /// Writes to stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Profiling runs per method; the median is reported.
    #[arg(long, default_value_t = 3)]
    runs: usize,
}

fn build_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut c = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => match args.profile.as_str() {
            "quick" => ExperimentConfig::quick(vec![PipelineSpec::new(Method::Eemd, &[])]),
            "paper" => ExperimentConfig::paper(vec![PipelineSpec::new(Method::Eemd, &[])]),
            other => bail!("unknown profile `{other}` (expected quick or paper)"),
        },
    };
    let aggregations = args.aggregations.iter().map(|a| a.parse()).collect::<Result<Vec<AggregationKind>, _>>()?;
    if !args.methods.is_empty() {
        c.pipelines = args
            .methods
            .iter()
            .map(|m| Ok(PipelineSpec::new(m.parse()?, &aggregations)))
            .collect::<Result<_>>()?;
    } else if !aggregations.is_empty() {
        for p in &mut c.pipelines {
            p.aggregations = aggregations.clone();
        }
    }
    if let Some(path) = &args.data {
        c.data = DataSource::Csv { path: path.clone(), columns: Default::default(), sites: Vec::new() };
    }
    if let Some(days) = args.days {
        match &mut c.data {
            DataSource::Synthetic(spec) => spec.days = days,
            DataSource::Csv { .. } => bail!("--days applies only to synthetic data"),
        }
    }
    if let Some(v) = args.input_minutes {
        c.input_minutes = v;
    }
    if let Some(v) = args.target_minutes {
        c.target_minutes = v;
    }
    if let Some(v) = args.repeats {
        c.repeats = v;
        c.seeds.clear();
    }
    if let Some(v) = args.base_seed {
        c.base_seed = v;
    }
    if let Some(seeds) = &args.seeds {
        c.repeats = seeds.len();
        c.seeds = seeds.clone();
    }
    if let Some(mode) = &args.leakage {
        c.leakage = mode.parse::<LeakageMode>()?;
    }
    if let Some(k) = args.trials {
        c.decomposition.noise.trials = k;
    }
    if args.sequential {
        c.execution = Execution::Sequential;
    }
    c.validate()?;
    Ok(c)
}

fn print_report(report: &MetricsReport, format: &str) -> Result<()> {
    let text = render_report(report, format.parse::<ReportFormat>()?)?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn load_series(path: Option<&Path>, days: f64, seed: u64) -> Result<TimeSeries> {
    Ok(match path {
        Some(p) => ingest_csv(p, &IngestOptions::default()).with_context(|| format!("reading {}", p.display()))?.0,
        None => generate(&SyntheticSpec { days, seed, ..SyntheticSpec::default() })?,
    })
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let spec = SyntheticSpec { days: a.days, interval_minutes: a.interval_minutes, seed: a.seed, ..Default::default() };
    let series = generate(&spec)?;
    write_flow_csv(&a.out, &series, spec.start_epoch)?;
    eprintln!("wrote {} samples to {}", series.len(), a.out.display());
    Ok(())
}

fn cmd_decompose(a: DecomposeArgs) -> Result<()> {
    let method = a
        .method
        .parse::<Method>()?
        .decomposition()
        .with_context(|| format!("`{}` is not a decomposition method", a.method))?;
    let series = load_series(a.input.as_deref(), a.days, a.seed)?;
    let end = a.length.map_or(series.len(), |n| a.start + n);
    if a.start >= end || end > series.len() {
        bail!("sample range {}..{end} is outside the series (length {})", a.start, series.len());
    }
    let values = &series.values()[a.start..end];
    let noise = NoiseConfig { trials: a.trials, epsilon: a.epsilon, seed: a.seed, ..NoiseConfig::default() };
    let exec = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let d = decompose_sequence(values, method, &SiftConfig::default(), &noise, exec)?;

    let mut w = csv::Writer::from_path(&a.out)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=d.imfs.len()).map(|m| format!("imf_{m}")));
    header.push("residue".into());
    w.write_record(&header)?;
    let origin = series.origin_index() + a.start as i64;
    for t in 0..values.len() {
        let mut row = vec![(origin + t as i64).to_string()];
        row.extend(d.imfs.iter().map(|imf| imf[t].to_string()));
        row.push(d.residue[t].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    eprintln!("{} IMFs plus residue over {} samples written to {}", d.imfs.len(), values.len(), a.out.display());
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut config = build_config(&a.config)?;
    config.output_dir = Some(a.out.clone());
    std::fs::create_dir_all(&a.out)?;
    std::fs::write(a.out.join("config.toml"), config.to_toml_string()?)?;
    let report = run_experiment(&config)?;
    print_report(&report, &a.format)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let mut args = a.config.clone();
    if args.config.is_none() {
        args.config = Some(a.models.join("config.toml"));
    }
    let config = build_config(&args)?;
    let mut report = MetricsReport::new(&config);
    for site in site_names(&config) {
        for (repeat, &seed) in config.run_seeds().iter().enumerate() {
            let data = prepare_data(&config, &site, seed)?;
            for p in &config.pipelines {
                let path = ensemble_path(&a.models, &site, p.method, repeat);
                let ensemble: TrainedEnsemble = load_checkpoint(&path, ENSEMBLE_FORMAT)
                    .with_context(|| format!("loading {}", path.display()))?;
                if ensemble.seed != seed {
                    bail!("{} was trained with seed {}, config expects {seed}", path.display(), ensemble.seed);
                }
                let (evals, timings, _) = evaluate_ensemble(&config, &data, &ensemble)?;
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
            }
            for entry in data.access.entries() {
                if !report.target_access.contains(&entry) {
                    report.target_access.push(entry);
                }
            }
        }
    }
    report.complete = true;
    report.summarise();
    let out = a.out.unwrap_or_else(|| a.models.join("evaluation"));
    std::fs::create_dir_all(&out)?;
    emit_report(&report, ReportFormat::Json, &out.join("report.json"))?;
    emit_report(&report, ReportFormat::Csv, &out.join("metrics.csv"))?;
    print_report(&report, &a.format)
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let report = load_report(&a.input)?;
    let format = a.format.parse::<ReportFormat>()?;
    match a.out {
        Some(path) => emit_report(&report, format, &path)?,
        None => std::io::stdout().write_all(render_report(&report, format)?.as_bytes())?,
    }
    Ok(())
}

fn cmd_profile(a: ProfileArgs) -> Result<()> {
    let config = build_config(&a.config)?;
    let methods: Vec<Method> = config.pipelines.iter().map(|p| p.method).collect();
    let timings = timing_profile(&config, &methods, a.runs)?;
    println!("{:<18} {:>10} {:>10} {:>10} {:>10} {:>10}", "method", "decompose", "train", "aggregate", "evaluate", "total");
    for t in &timings {
        let m = &t.median;
        println!(
            "{:<18} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            t.method.name(),
            m.decompose,
            m.train,
            m.aggregate,
            m.evaluate,
            m.total
        );
    }
    println!("minutes, median of {} runs", a.runs);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(a) => cmd_generate(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Report(a) => cmd_report(a),
        Command::Profile(a) => cmd_profile(a),
    }
}
