//! The four subcommands: break detection, bootstrap uncertainty,
//! simulation studies, and curve forecasting.

use std::path::{Path, PathBuf};

use clap::Args;
use stoptime_core::bootstrap::{bootstrap_stopping_distribution, BootstrapConfig};
use stoptime_core::detector::{stopping_time_with, training_window, WindowScheme};
use stoptime_core::fda::{KernelKind, KernelSpec};
use stoptime_core::forecast::{fit_fts, KernelChoice};
use stoptime_core::simulate::{run_monte_carlo, ExperimentGrid};

use crate::emit;
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_csv, Ingested, Layout};
use crate::report::{
    bootstrap_report, isfe_columns, ssr_columns, ConfigEcho, DetectionReport, InputEcho,
    RuntimeStats, SCHEMA,
};

/// Parses `expanding`, `fixed:<len>`, or a bare window length.
fn parse_window(s: &str) -> Result<WindowScheme, String> {
    if s.eq_ignore_ascii_case("expanding") {
        return Ok(WindowScheme::Expanding);
    }
    let digits = s.strip_prefix("fixed:").unwrap_or(s);
    digits
        .parse::<usize>()
        .map(WindowScheme::Fixed)
        .map_err(|_| format!("expected 'expanding', 'fixed:<len>', or a length, got '{s}'"))
}

fn window_string(w: WindowScheme) -> String {
    match w {
        WindowScheme::Expanding => "expanding".into(),
        WindowScheme::Fixed(l) => format!("fixed:{l}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelArg {
    Bartlett,
    #[value(name = "flattop")]
    FlatTop,
}

impl KernelArg {
    fn kind(self) -> KernelKind {
        match self {
            KernelArg::Bartlett => KernelKind::Bartlett,
            KernelArg::FlatTop => KernelKind::FlatTop,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            KernelArg::Bartlett => "bartlett",
            KernelArg::FlatTop => "flattop",
        }
    }
}

/// Flags shared by every command that reads curve data.
#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Input CSV of curves.
    #[arg(long)]
    pub input: PathBuf,
    /// How the file maps rows and columns to time and grid.
    #[arg(long, value_enum, default_value = "rows=time")]
    pub layout: Layout,
    /// Training window per refit: 'fixed:<len>' or 'expanding'.
    #[arg(long, value_parser = parse_window, default_value = "fixed:3")]
    pub window: WindowScheme,
    /// Covariance kernel for the long-run surface.
    #[arg(long, value_enum, default_value = "bartlett")]
    pub kernel: KernelArg,
    /// Fixed kernel bandwidth; omit to use the plug-in rule.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Minimum observations per regime in the break search.
    #[arg(long, default_value_t = 2)]
    pub min_segment: usize,
    /// Directory for output artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Cap on worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Include per-window component counts in the report.
    #[arg(long)]
    pub verbose: bool,
}

impl PipelineArgs {
    fn kernel_choice(&self) -> CliResult<KernelChoice> {
        match self.bandwidth {
            Some(bw) => Ok(KernelChoice::Fixed(
                KernelSpec::new(self.kernel.kind(), bw).map_err(CliError::from)?,
            )),
            None => Ok(KernelChoice::Auto {
                kind: self.kernel.kind(),
            }),
        }
    }

    fn config_echo(&self) -> ConfigEcho {
        ConfigEcho {
            window: window_string(self.window),
            kernel: self.kernel.as_str().to_string(),
            bandwidth: self.bandwidth,
            min_segment: self.min_segment,
        }
    }

    fn input_echo(&self, ing: &Ingested) -> InputEcho {
        InputEcho {
            path: self.input.display().to_string(),
            layout: self.layout.as_str().to_string(),
            curves: ing.fts.n(),
            grid_points: ing.fts.grid().len(),
            timestamp_column_ignored: ing.timestamp_column_ignored,
        }
    }
}

/// Runs a closure inside a dedicated thread pool when a cap is requested.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        Some(t) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::input(format!("thread pool: {e}")))?
            .install(f)),
        None => Ok(f()),
    }
}

fn components_per_window(
    fts: &stoptime_core::fda::FunctionalTimeSeries,
    kernel: KernelChoice,
    window: WindowScheme,
) -> CliResult<Vec<usize>> {
    (3..fts.n())
        .map(|gamma| {
            let train = training_window(fts, gamma, window)?;
            Ok(fit_fts(&train, kernel)?.k())
        })
        .collect()
}

fn build_report(
    args: &PipelineArgs,
    command: &str,
    ing: &Ingested,
    kernel: KernelChoice,
) -> CliResult<DetectionReport> {
    let det = with_threads(args.threads, || {
        stopping_time_with(&ing.fts, kernel, args.window, args.min_segment)
    })??;
    let components = if args.verbose {
        Some(components_per_window(&ing.fts, kernel, args.window)?)
    } else {
        None
    };
    Ok(DetectionReport {
        schema: SCHEMA.to_string(),
        command: command.to_string(),
        input: args.input_echo(ing),
        config: args.config_echo(),
        stopping_time: det.breakpoint.stopping_time,
        break_index: det.breakpoint.break_index,
        regime_means: det.breakpoint.regime_means,
        isfe: isfe_columns(&det),
        ssr: ssr_columns(&det),
        components_per_window: components,
        bootstrap: None,
        runtime: RuntimeStats {
            windows_evaluated: det.isfe.len(),
            candidate_splits: det.breakpoint.candidates.len(),
        },
    })
}

fn write_report_artifacts(report: &DetectionReport, out: &Path) -> CliResult<()> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Numerical(format!("report serialization: {e}")))?;
    json.push('\n');
    emit::write_file(out, "report.json", &json)?;
    emit::write_file(out, "isfe.csv", &emit::isfe_csv(&report.isfe))?;
    emit::write_file(out, "ssr.csv", &emit::ssr_csv(&report.ssr))?;
    Ok(())
}

pub fn cmd_detect(args: &PipelineArgs) -> CliResult<()> {
    let ing = ingest_csv(&args.input, args.layout)?;
    let kernel = args.kernel_choice()?;
    let report = build_report(args, "detect", &ing, kernel)?;
    write_report_artifacts(&report, &args.out)?;
    println!(
        "stopping time: {} (break index {})",
        report.stopping_time, report.break_index
    );
    println!(
        "artifacts: {}",
        args.out.join("report.json, isfe.csv, ssr.csv").display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Number of bootstrap replications.
    #[arg(long = "B", default_value_t = 1000)]
    pub replications: usize,
    /// Master seed for the bootstrap resampling streams.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Refit the curve model inside every replication (slower).
    #[arg(long = "deep-bootstrap")]
    pub deep: bool,
}

pub fn cmd_bootstrap(args: &BootstrapArgs) -> CliResult<()> {
    let p = &args.pipeline;
    let ing = ingest_csv(&p.input, p.layout)?;
    let kernel = p.kernel_choice()?;
    let mut report = build_report(p, "bootstrap", &ing, kernel)?;
    let cfg = BootstrapConfig {
        replications: args.replications,
        seed: args.seed,
        threads: None,
        deep: args.deep,
        kernel,
        window: p.window,
        min_segment: p.min_segment,
    };
    let dist = with_threads(p.threads, || bootstrap_stopping_distribution(&ing.fts, &cfg))??;
    report.bootstrap = Some(bootstrap_report(&dist, args.replications, args.seed, args.deep));
    write_report_artifacts(&report, &p.out)?;
    emit::write_file(&p.out, "bootstrap_frequency.csv", &emit::frequency_csv(&dist))?;
    let b = report.bootstrap.as_ref().expect("just set");
    println!(
        "stopping time: {} (break index {}); bootstrap mode: {} over {} replications ({} failed)",
        report.stopping_time, report.break_index, b.mode, args.replications, dist.failures
    );
    println!(
        "artifacts: {}",
        p.out
            .join("report.json, isfe.csv, ssr.csv, bootstrap_frequency.csv")
            .display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Run configuration (key/value file describing the experiment grid).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the configured replication count.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Override the configured master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for output artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Cap on worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", args.config.display())))?;
    let mut grid: ExperimentGrid = toml::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", args.config.display())))?;
    if let Some(reps) = args.reps {
        grid.replications = reps;
    }
    if let Some(seed) = args.seed {
        grid.seed = seed;
    }
    let cases = grid.cases().map_err(CliError::from)?;
    let rows = with_threads(args.threads, || -> CliResult<Vec<emit::CaseRow>> {
        cases
            .iter()
            .map(|case| {
                let summary = run_monte_carlo(&case.spec, grid.replications, grid.seed)?;
                Ok(emit::CaseRow {
                    label: case.label.clone(),
                    summary,
                })
            })
            .collect()
    })??;
    let table = emit::results_txt(&rows);
    emit::write_file(&args.out, "results.csv", &emit::results_csv(&rows))?;
    emit::write_file(&args.out, "results.txt", &table)?;
    print!("{table}");
    println!(
        "artifacts: {}",
        args.out.join("results.csv, results.txt").display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Forecast horizon: emit curves for steps 1..=h.
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
}

pub fn cmd_forecast(args: &ForecastArgs) -> CliResult<()> {
    let p = &args.pipeline;
    if args.horizon == 0 {
        return Err(CliError::input("horizon must be at least 1"));
    }
    let ing = ingest_csv(&p.input, p.layout)?;
    let kernel = p.kernel_choice()?;
    let model = with_threads(p.threads, || fit_fts(&ing.fts, kernel))??;
    let horizons: Vec<Vec<f64>> = (1..=args.horizon).map(|h| model.forecast_curve(h)).collect();
    emit::write_file(
        &p.out,
        "forecast.csv",
        &emit::forecast_csv(ing.fts.grid().points(), &horizons),
    )?;
    println!(
        "{} curve(s) forecast from {} training curves ({} components)",
        args.horizon,
        ing.fts.n(),
        model.k()
    );
    println!("artifacts: {}", p.out.join("forecast.csv").display());
    Ok(())
}
