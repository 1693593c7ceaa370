#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncbounds::attractor::{self, AttractorError, CloudMode, GridEstimate};
use ncbounds::bounds::{self, BoundsError, Inversion};
use ncbounds::pipeline::{self, AnalysisReport, PipelineError};
use serde::Serialize;

use config::JobConfig;
use output::num;

/// Dimension bounds for non-conformal affine IFS attractors.
#[derive(Parser)]
#[command(name = "ncbounds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full bound pipeline and print the report.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Use this Σ for both shifted Bowen roots.
        #[arg(long, allow_negative_numbers = true)]
        sigma_override: Option<f64>,
    },
    /// Tabulate the lower-bound curve L(Σ) as CSV and SVG.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the box-counting dimension and check it against the bounds.
    Boxdim {
        #[command(flatten)]
        common: Common,
    },
    /// Find Σ with L(Σ) equal to a target dimension.
    Invert {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: f64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(Vec<String>),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn report(&self) {
        match self {
            CliError::Usage(m) => eprintln!("error: {m}"),
            CliError::Validation(v) => {
                eprintln!("validation failed:");
                for line in v {
                    eprintln!("  {line}");
                }
            }
            CliError::Numeric(m) => eprintln!("numeric failure: {m}"),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Violations(v) => CliError::Validation(v.iter().map(ToString::to_string).collect()),
            PipelineError::Invalid(e) => CliError::Validation(vec![e.to_string()]),
            PipelineError::Bounds(e) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<AttractorError> for CliError {
    fn from(e: AttractorError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

fn out_dir(common: &Common, cfg: &JobConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.output.dir.clone())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn analyze(cfg: &JobConfig, sigma_override: Option<f64>) -> Result<AnalysisReport, CliError> {
    Ok(pipeline::analyze(&cfg.system, &cfg.options(sigma_override))?)
}

fn cmd_analyze(common: &Common, sigma_override: Option<f64>) -> Result<(), CliError> {
    let cfg = JobConfig::load(&common.config)?;
    let report = analyze(&cfg, sigma_override)?;
    let text = report::render(&report);
    print!("{text}");
    if let Some(dir) = out_dir(common, &cfg) {
        write(&dir, "report.txt", &text)?;
        write(&dir, "report.json", &to_json(&report))?;
    }
    Ok(())
}

fn cmd_sweep(common: &Common) -> Result<(), CliError> {
    let cfg = JobConfig::load(&common.config)?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("config has no `sweep` block".into()))?;
    let report = analyze(&cfg, None)?;
    let curve = bounds::dimension_curve(&report.stats, &report.params, &sweep.grid())?;
    let csv = output::sweep_csv(&curve);
    match out_dir(common, &cfg) {
        Some(dir) => {
            write(&dir, "sweep.csv", &csv)?;
            write(&dir, "sweep.svg", &output::sweep_svg(&curve))?;
            println!("wrote {} rows to {}", curve.len(), dir.join("sweep.csv").display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct BoxdimReport {
    estimator: CloudMode,
    points: usize,
    estimate: GridEstimate,
    band: (f64, f64),
    pass: bool,
}

fn cmd_boxdim(common: &Common) -> Result<(), CliError> {
    let cfg = JobConfig::load(&common.config)?;
    let estimator = cfg
        .estimator
        .as_ref()
        .ok_or_else(|| CliError::Usage("config has no `estimator` block".into()))?;
    let mode = estimator.cloud_mode()?;
    let report = analyze(&cfg, None)?;
    let cloud = attractor::generate(&cfg.system, mode)?;
    let estimate = attractor::box_count(&cloud, &estimator.scales(), estimator.drop_coarse)?;
    let b = &report.box_bounds;
    let band = (b.lower_clamped - 0.05, b.upper_clamped + 0.05);
    let pass = estimate.slope >= band.0 && estimate.slope <= band.1;
    let summary = BoxdimReport {
        estimator: mode,
        points: cloud.len(),
        band,
        pass,
        estimate,
    };
    println!("points           {}", summary.points);
    for (s, c) in summary.estimate.scales.iter().zip(&summary.estimate.counts) {
        println!("  scale {}  count {c}", num(*s));
    }
    println!(
        "slope            {} ± {}  r² {}",
        num(summary.estimate.slope),
        num(summary.estimate.slope_stderr),
        num(summary.estimate.r_squared)
    );
    println!("band             [{}, {}]", num(band.0), num(band.1));
    println!("verdict          {}", if pass { "PASS" } else { "FAIL" });
    if let Some(dir) = out_dir(common, &cfg) {
        write(&dir, "boxdim.json", &to_json(&summary))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct InvertReport {
    target: f64,
    inversion: Inversion,
}

fn cmd_invert(common: &Common, target: f64) -> Result<(), CliError> {
    let cfg = JobConfig::load(&common.config)?;
    let report = analyze(&cfg, None)?;
    let inversion = bounds::invert_dimension(&report.stats, &report.params, target, None, 1e-10)?;
    println!("sigma            {}", num(inversion.sigma));
    println!("dimension        {}", num(inversion.dimension));
    println!("residual         {}", num(inversion.residual));
    println!(
        "admissible       [{}, {}] over [0, {}]",
        num(inversion.admissible.0),
        num(inversion.admissible.1),
        num(inversion.sigma_max)
    );
    if let Some(dir) = out_dir(common, &cfg) {
        write(&dir, "invert.json", &to_json(&InvertReport { target, inversion }))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Analyze { common, sigma_override } => cmd_analyze(common, *sigma_override),
        Command::Sweep { common } => cmd_sweep(common),
        Command::Boxdim { common } => cmd_boxdim(common),
        Command::Invert { common, target } => cmd_invert(common, *target),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.code())
        }
    }
}
