//! `gmi` command line interface.
//!
//! Exit codes: 0 success, 1 data or computation error, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{GmiError, Result};
use crate::estimator::BandwidthRule;
use crate::io::{parse_csv, restrict_followup, ColumnMap, Dataset};
use crate::methods::{analyze, Analysis, Bandwidth};
use crate::report;
use crate::simulation::{
    calibrate_alpha, calibrate_tau, run_grid, write_grid_csv, CalibrationConfig, FrailtyModel, GridConfig,
};
use crate::uncertainty::BootstrapConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gmi",
    version,
    about = "Survival function of the growth modulation index under dependent censoring"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimates, SEs and CIs for all methods, with %Dif and Wald p-values against the proposed estimator.
    Estimate(EstimateArgs),
    /// Export the estimated step curves with pointwise log-log intervals.
    Curve(CurveArgs),
    /// Wald tests of each traditional estimator against the proposed one.
    Compare(EstimateArgs),
    /// Run a Monte Carlo simulation grid from a key-value config file.
    Simulate(SimulateArgs),
    /// Calibrate the frailty shape and censoring horizon for a scenario.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with columns t0, time1, status1 and optional z1.., v1..
    #[arg(long)]
    pub data: PathBuf,
    /// Restrict follow-up to this many months (later events become censored).
    #[arg(long)]
    pub followup_cap: Option<f64>,
    #[arg(long, default_value = "t0")]
    pub t0_col: String,
    #[arg(long, default_value = "time1")]
    pub time_col: String,
    #[arg(long, default_value = "status1")]
    pub status_col: String,
    #[arg(long, default_value = "z")]
    pub z_prefix: String,
    #[arg(long, default_value = "v")]
    pub v_prefix: String,
}

#[derive(Debug, Args)]
pub struct InferenceArgs {
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 5000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 20_210_611)]
    pub seed: u64,
    /// Exponent of the bandwidth rule sd(log t0) * n^-exponent.
    #[arg(long, default_value_t = 0.4, conflicts_with = "bandwidth")]
    pub bandwidth_exponent: f64,
    /// Fixed bandwidth on the log t0 scale, overriding the rule.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Keep the full-data bandwidth inside the bootstrap instead of re-deriving it per resample.
    #[arg(long)]
    pub fixed_bootstrap_bandwidth: bool,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub inference: InferenceArgs,
    /// Thresholds r for P(GMI > r).
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.3, 1.5, 1.7])]
    pub thresholds: Vec<f64>,
    /// Write results as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write results as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub inference: InferenceArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Override the configured number of replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Override the configured bootstrap size.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Override the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, default_value_t = FrailtyModel::DEFAULT_MU)]
    pub mu: f64,
    #[arg(long)]
    pub sigma: f64,
    /// Ratio of medians R.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
    /// Target correlation between T0 and T1.
    #[arg(long)]
    pub corr: f64,
    /// Target censoring rate of T1.
    #[arg(long)]
    pub censoring: f64,
    #[arg(long, default_value_t = CalibrationConfig::default().samples)]
    pub samples: usize,
    #[arg(long, default_value_t = CalibrationConfig::default().seed)]
    pub seed: u64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                GmiError::InvalidParameter(_) | GmiError::Config(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, false),
        Command::Compare(a) => cmd_estimate(&a, true),
        Command::Curve(a) => cmd_curve(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
    }
}

fn load(args: &DataArgs) -> Result<Dataset> {
    let map = ColumnMap {
        t0: args.t0_col.clone(),
        time1: args.time_col.clone(),
        status1: args.status_col.clone(),
        continuous_prefix: args.z_prefix.clone(),
        categorical_prefix: args.v_prefix.clone(),
    };
    let ds = parse_csv(&args.data, &map)?;
    let ds = match args.followup_cap {
        Some(cap) => restrict_followup(&ds, cap)?,
        None => ds,
    };
    if ds.records.len() < 2 {
        return Err(GmiError::TooFewSubjects {
            needed: 2,
            got: ds.records.len(),
        });
    }
    crate::data::validate(&ds.records)?;
    Ok(ds)
}

fn settings(a: &InferenceArgs) -> Result<(Bandwidth, BootstrapConfig)> {
    let bandwidth = match a.bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => Bandwidth::Fixed(h),
        Some(h) => {
            return Err(GmiError::InvalidParameter(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
        None => Bandwidth::Rule(BandwidthRule::new(a.bandwidth_exponent)?),
    };
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(GmiError::InvalidParameter(format!(
            "level must be in (0,1), got {}",
            a.level
        )));
    }
    let cfg = BootstrapConfig {
        resamples: a.bootstrap,
        seed: a.seed,
        rebandwidth: !a.fixed_bootstrap_bandwidth,
    };
    Ok((bandwidth, cfg))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    source: &'a Path,
    n: usize,
    events: usize,
    censored: usize,
    followup_cap: Option<f64>,
    bootstrap: BootstrapConfig,
    level: f64,
    #[serde(flatten)]
    analysis: &'a Analysis,
}

fn cmd_estimate(a: &EstimateArgs, compare_only: bool) -> Result<()> {
    let ds = load(&a.data)?;
    let (bandwidth, cfg) = settings(&a.inference)?;
    if a.thresholds.is_empty() || a.thresholds.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(GmiError::InvalidParameter(
            "thresholds must be finite and nonnegative".into(),
        ));
    }
    let analysis = analyze(&ds.records, &a.thresholds, bandwidth, &cfg, a.inference.level)?;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "n = {}, events = {}, censored = {} ({:.1}%), bandwidth = {:.4}, bootstrap B = {}",
        ds.records.len(),
        ds.events(),
        ds.censored(),
        100.0 * ds.censoring_rate(),
        analysis.bandwidth,
        cfg.resamples
    )?;
    if compare_only {
        write!(out, "{}", report::format_comparisons(&analysis))?;
    } else {
        write!(out, "{}", report::format_estimate_table(&analysis))?;
    }

    if let Some(path) = &a.json {
        let doc = EstimateOutput {
            source: &ds.source,
            n: ds.records.len(),
            events: ds.events(),
            censored: ds.censored(),
            followup_cap: a.data.followup_cap,
            bootstrap: cfg,
            level: a.inference.level,
            analysis: &analysis,
        };
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
    }
    if let Some(path) = &a.csv {
        if compare_only {
            report::write_rows_csv(
                &analysis.comparisons.iter().map(CompareRow::from).collect::<Vec<_>>(),
                create(path)?,
            )?;
        } else {
            report::write_rows_csv(&report::estimate_rows(&analysis), create(path)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    method: crate::methods::Method,
    r: f64,
    estimate: f64,
    proposed: f64,
    pct_diff: f64,
    diff: f64,
    se_diff: f64,
    z: f64,
    p_value: f64,
}

impl From<&crate::methods::Comparison> for CompareRow {
    fn from(c: &crate::methods::Comparison) -> Self {
        Self {
            method: c.method,
            r: c.r,
            estimate: c.estimate,
            proposed: c.proposed,
            pct_diff: c.pct_diff,
            diff: c.wald.diff,
            se_diff: c.wald.se_diff,
            z: c.wald.z,
            p_value: c.wald.p,
        }
    }
}

fn cmd_curve(a: &CurveArgs) -> Result<()> {
    let ds = load(&a.data)?;
    let (bandwidth, cfg) = settings(&a.inference)?;
    let export = report::curve_export(&ds.records, bandwidth, &cfg, a.inference.level)?;
    match &a.output {
        Some(p) => report::write_curve_csv(&export, create(p)?),
        None => report::write_curve_csv(&export, io::stdout().lock()),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut cfg = GridConfig::from_path(&a.config)?;
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(b) = a.bootstrap {
        cfg.bootstrap = b;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let rows = run_grid(&cfg)?;
    match &a.output {
        Some(p) => write_grid_csv(&rows, create(p)?),
        None => write_grid_csv(&rows, io::stdout().lock()),
    }
}

#[derive(Serialize)]
struct CalibrationOutput {
    mu: f64,
    sigma: f64,
    ratio: f64,
    target_correlation: f64,
    alpha: f64,
    achieved_correlation: f64,
    target_censoring: f64,
    tau: f64,
    achieved_censoring: f64,
}

fn cmd_calibrate(a: &CalibrateArgs) -> Result<()> {
    let cal = CalibrationConfig {
        samples: a.samples,
        seed: a.seed,
        ..Default::default()
    };
    let alpha = calibrate_alpha(a.mu, a.sigma, a.ratio, a.corr, &cal)?;
    let model = FrailtyModel::new(a.mu, a.sigma, a.ratio, alpha.alpha)?;
    let tau = calibrate_tau(&model, a.censoring, &cal)?;
    let out = CalibrationOutput {
        mu: a.mu,
        sigma: a.sigma,
        ratio: a.ratio,
        target_correlation: a.corr,
        alpha: alpha.alpha,
        achieved_correlation: alpha.achieved,
        target_censoring: a.censoring,
        tau: tau.tau,
        achieved_censoring: tau.achieved,
    };
    println!(
        "alpha = {:.6} (corr {:.4}), tau = {:.6} (censoring {:.4})",
        out.alpha, out.achieved_correlation, out.tau, out.achieved_censoring
    );
    if let Some(p) = &a.json {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &out)?;
        writeln!(w)?;
    }
    Ok(())
}
