use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GmiError, Result};
use crate::estimator::BandwidthRule;
use crate::methods::Method;

use super::calibrate::{calibrate_alpha, calibrate_tau, CalibrationConfig};
use super::model::FrailtyModel;
use super::scenario::{run_scenario, SimScenario};
use super::truth::TRUTH_DRAWS;

/// Simulation grid read from a key-value (TOML) file. List-valued keys span
/// the grid; every combination is calibrated and run.
///
/// ```toml
/// sigma = [0.3, 0.5]
/// ratio = [1.0]
/// correlation = [0.5]
/// censoring = [0.2, 0.3]
/// n = [50, 70, 90]
/// thresholds = [1.3, 1.5, 1.7]
/// replicates = 500
/// bootstrap = 300
/// seed = 2021
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub sigma: Vec<f64>,
    #[serde(default = "default_ratio")]
    pub ratio: Vec<f64>,
    #[serde(default = "default_corr")]
    pub correlation: Vec<f64>,
    pub censoring: Vec<f64>,
    pub n: Vec<usize>,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_exponent")]
    pub bandwidth_exponent: f64,
    #[serde(default = "default_true")]
    pub rebandwidth: bool,
    #[serde(default = "default_calibration_samples")]
    pub calibration_samples: usize,
    #[serde(default = "default_truth_draws")]
    pub truth_draws: usize,
}

fn default_mu() -> f64 {
    FrailtyModel::DEFAULT_MU
}
fn default_ratio() -> Vec<f64> {
    vec![1.0]
}
fn default_corr() -> Vec<f64> {
    vec![0.5]
}
fn default_thresholds() -> Vec<f64> {
    vec![1.3, 1.5, 1.7]
}
fn default_replicates() -> usize {
    SimScenario::DEFAULT_REPLICATES
}
fn default_bootstrap() -> usize {
    SimScenario::DEFAULT_BOOTSTRAP
}
fn default_seed() -> u64 {
    2021
}
fn default_exponent() -> f64 {
    0.4
}
fn default_true() -> bool {
    true
}
fn default_calibration_samples() -> usize {
    CalibrationConfig::default().samples
}
fn default_truth_draws() -> usize {
    TRUTH_DRAWS
}

impl GridConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: GridConfig = toml::from_str(s).map_err(|e| GmiError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn check(&self) -> Result<()> {
        let empty = [
            ("sigma", self.sigma.is_empty()),
            ("ratio", self.ratio.is_empty()),
            ("correlation", self.correlation.is_empty()),
            ("censoring", self.censoring.is_empty()),
            ("n", self.n.is_empty()),
            ("thresholds", self.thresholds.is_empty()),
        ];
        if let Some((k, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(GmiError::Config(format!("'{k}' must list at least one value")));
        }
        BandwidthRule::new(self.bandwidth_exponent)?;
        Ok(())
    }
}

/// One output row: a (σ, R, corr, C, n, method, r) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub sigma: f64,
    pub ratio: f64,
    pub correlation: f64,
    pub censoring: f64,
    pub n: usize,
    pub method: Method,
    pub r: f64,
    pub alpha: f64,
    pub tau: f64,
    pub achieved_censoring: f64,
    pub truth: f64,
    pub bias: f64,
    pub se: f64,
    pub see: f64,
    pub cp: f64,
    pub failures: usize,
}

pub fn run_grid(cfg: &GridConfig) -> Result<Vec<GridRow>> {
    let cal = CalibrationConfig {
        samples: cfg.calibration_samples,
        seed: cfg.seed,
        ..Default::default()
    };
    let rule = BandwidthRule::new(cfg.bandwidth_exponent)?;
    let mut rows = Vec::new();
    for &sigma in &cfg.sigma {
        for &ratio in &cfg.ratio {
            for &corr in &cfg.correlation {
                let alpha = calibrate_alpha(cfg.mu, sigma, ratio, corr, &cal)?.alpha;
                let model = FrailtyModel::new(cfg.mu, sigma, ratio, alpha)?;
                for &cens in &cfg.censoring {
                    let tau = calibrate_tau(&model, cens, &cal)?.tau;
                    for &n in &cfg.n {
                        log::info!("sigma={sigma} R={ratio} corr={corr} C={cens} n={n}: alpha={alpha:.4} tau={tau:.4}");
                        let mut s = SimScenario::new(model, tau, n, &cfg.thresholds);
                        s.replicates = cfg.replicates;
                        s.bootstrap_b = cfg.bootstrap;
                        s.seed = cfg.seed;
                        s.bandwidth = rule;
                        s.rebandwidth = cfg.rebandwidth;
                        s.truth_draws = cfg.truth_draws;
                        let res = run_scenario(&s)?;
                        for c in &res.cells {
                            rows.push(GridRow {
                                sigma,
                                ratio,
                                correlation: corr,
                                censoring: cens,
                                n,
                                method: c.method,
                                r: c.r,
                                alpha,
                                tau,
                                achieved_censoring: res.achieved_censoring,
                                truth: c.truth,
                                bias: c.bias,
                                se: c.se,
                                see: c.see,
                                cp: c.cp,
                                failures: c.failures,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_grid_csv<W: Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
