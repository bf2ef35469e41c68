//! `almi`: benchmark batches, report statistics, smoothing fits and
//! synthetic series from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use almi_pso::harness::{compare_reports, run_batch, write_outputs, ExperimentConfig};
use almi_pso::io::{
    read_report_csv, read_series_csv, write_fitted_spec_json, write_forecast_csv,
    write_gnuplot_surface, write_series_csv, FittedSpec,
};
use almi_pso::smoothing::{
    fit_parameters_with, grid_search_fit, rolling_forecasts, synth_sinusoid, EvaluationScheme,
    Metric, NoiseResampling, SmoothingKind,
};
use almi_pso::OptimizerConfig;
use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "almi",
    version,
    about = "ALMI-PSO experiments and smoothing-parameter fitting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark experiment described by a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed; overrides the config's `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; overrides the config's `jobs`.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Friedman and pairwise Wilcoxon tests over report CSVs.
    Stats {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Also write the tables to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit smoothing parameters with ALMI-PSO and with a grid search.
    Fit {
        /// Single-column series CSV, header optional.
        series: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Season length, required for holt-winters.
        #[arg(long)]
        season: Option<usize>,
        #[arg(long, default_value_t = 20)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        horizon: usize,
        #[arg(long, default_value = "rmse")]
        metric: Metric,
        #[arg(long, default_value_t = 0.05)]
        grid_resolution: f64,
        /// Optimizer evaluations; defaults to 10000 per parameter.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Re-sample Gaussian noise of this sd onto the series at every
        /// optimizer evaluation.
        #[arg(long)]
        noise_sd: Option<f64>,
        /// Directory for the fitted spec, forecasts and loss surface.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded noisy sinusoid as a single-column CSV.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 25.0)]
        period: f64,
        #[arg(long, default_value_t = 0.1)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ses,
    Holt,
    HoltWinters,
}

/// Bad input exits with 2, anything else with 1.
enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

trait Classify<T> {
    fn input(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn bench(
    config: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::load(config)
        .with_context(|| format!("reading {}", config.display()))
        .input()?;
    if let Some(seed) = seed {
        cfg.base_seed = seed;
    }
    if jobs.is_some() {
        cfg.jobs = jobs;
    }
    cfg.validate().input()?;
    let out = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));

    let batch = run_batch(&cfg).runtime()?;
    for failed in batch.failures() {
        if let Err(msg) = &failed.outcome {
            eprintln!(
                "run {} / {} / {} failed: {msg}",
                failed.key.function_id, failed.key.algorithm_id, failed.key.run_index
            );
        }
    }
    let written = write_outputs(&batch, &out).runtime()?;
    print!("{}", almi_pso::io::markdown_report(&batch.reports));
    eprintln!(
        "wrote {} traces and {}",
        written.traces.len(),
        written.report_csv.display()
    );
    Ok(())
}

fn stats(reports: &[PathBuf], out: Option<PathBuf>) -> Result<(), Failure> {
    let mut labelled = Vec::with_capacity(reports.len());
    for path in reports {
        let label = path.file_stem().map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        let rows = read_report_csv(path)
            .with_context(|| format!("reading {}", path.display()))
            .input()?;
        labelled.push((label, rows));
    }
    let comparison = compare_reports(&labelled).input()?;
    let tables = comparison.to_markdown();
    print!("{tables}");
    if let Some(path) = out {
        std::fs::write(&path, &tables)
            .with_context(|| format!("writing {}", path.display()))
            .runtime()?;
    }
    Ok(())
}

fn kind_of(kind: KindArg, season: Option<usize>) -> Result<SmoothingKind, Failure> {
    match (kind, season) {
        (KindArg::Ses, _) => Ok(SmoothingKind::Single),
        (KindArg::Holt, _) => Ok(SmoothingKind::Double),
        (KindArg::HoltWinters, Some(season_length)) => Ok(SmoothingKind::Triple { season_length }),
        (KindArg::HoltWinters, None) => Err(Failure::Input(anyhow!("holt-winters needs --season"))),
    }
}

fn format_params(params: &[f64]) -> String {
    params
        .iter()
        .map(|p| format!("{p:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[allow(clippy::too_many_arguments)]
fn fit(
    series_path: &Path,
    kind: SmoothingKind,
    scheme: EvaluationScheme,
    grid_resolution: f64,
    budget: Option<usize>,
    seed: u64,
    noise_sd: Option<f64>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let series = read_series_csv(series_path)
        .with_context(|| format!("reading {}", series_path.display()))
        .input()?;
    let cfg = OptimizerConfig {
        max_evaluations: budget,
        seed,
        ..Default::default()
    };
    cfg.validate(kind.param_count()).input()?;
    let resampling = noise_sd.map(|noise_sd| NoiseResampling { noise_sd, seed });
    let (fitted, _) = fit_parameters_with(kind, &series, &scheme, &cfg, resampling).input()?;
    let grid = grid_search_fit(kind, &series, &scheme, grid_resolution).input()?;

    println!("model: {}  metric: {}", kind.name(), scheme.metric);
    println!("{:<12} {:>28} {:>28}", "", "optimizer", "grid");
    println!(
        "{:<12} {:>28} {:>28}",
        "params",
        format_params(&fitted.spec.params),
        format_params(&grid.spec.params)
    );
    println!("{:<12} {:>28.9} {:>28.9}", "loss", fitted.loss, grid.loss);
    println!(
        "{:<12} {:>28} {:>28}",
        "evaluations", fitted.evaluations, grid.evaluations
    );

    if let Some(dir) = out {
        write_fitted_spec_json(
            &dir.join("fitted.json"),
            &FittedSpec::new(&fitted.spec, fitted.loss, scheme.metric),
        )
        .runtime()?;
        write_fitted_spec_json(
            &dir.join("grid.json"),
            &FittedSpec::new(&grid.spec, grid.loss, scheme.metric),
        )
        .runtime()?;
        let points = rolling_forecasts(&fitted.spec, &series, scheme.window_length, scheme.horizon)
            .runtime()?;
        write_forecast_csv(&dir.join("forecast.csv"), &points).runtime()?;
        write_gnuplot_surface(&dir.join("surface.dat"), &grid).runtime()?;
    }
    Ok(())
}

fn synth(
    n: usize,
    amplitude: f64,
    period: f64,
    noise_sd: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let series = synth_sinusoid(n, amplitude, period, noise_sd, seed).input()?;
    match out {
        Some(path) => write_series_csv(&path, &series, Some("value")).runtime(),
        None => {
            println!("value");
            for v in series {
                println!("{v}");
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bench {
            config,
            out,
            seed,
            jobs,
        } => bench(&config, out, seed, jobs),
        Command::Stats { reports, out } => stats(&reports, out),
        Command::Fit {
            series,
            kind,
            season,
            window,
            horizon,
            metric,
            grid_resolution,
            budget,
            seed,
            noise_sd,
            out,
        } => {
            let scheme = EvaluationScheme {
                window_length: window,
                horizon,
                metric,
            };
            fit(
                &series,
                kind_of(kind, season)?,
                scheme,
                grid_resolution,
                budget,
                seed,
                noise_sd,
                out,
            )
        }
        Command::Synth {
            n,
            amplitude,
            period,
            noise_sd,
            seed,
            out,
        } => synth(n, amplitude, period, noise_sd, seed, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
