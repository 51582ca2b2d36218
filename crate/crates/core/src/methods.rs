//! The four estimators compared throughout, behind one interface, plus the
//! joint paired-bootstrap analysis used for tables and Wald tests.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{aft_fit_from, aft_survival, km_naive, AftFamily};
use crate::data::SubjectRecord;
use crate::error::{GmiError, Result};
use crate::estimator::{default_bandwidth, BandwidthRule, GmiFit, Kernel};
use crate::uncertainty::{bootstrap_map, column_sds, sample_sd, BootstrapConfig, GmiEstimate, WaldResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    Km,
    LogNormal,
    LogLogistic,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Proposed, Method::Km, Method::LogNormal, Method::LogLogistic];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Km => "km",
            Method::LogNormal => "lognormal",
            Method::LogLogistic => "loglogistic",
        }
    }

    fn family(self) -> Option<AftFamily> {
        match self {
            Method::LogNormal => Some(AftFamily::LogNormal),
            Method::LogLogistic => Some(AftFamily::LogLogistic),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = GmiError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GmiError::InvalidParameter(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    Rule(BandwidthRule),
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(&self, data: &[SubjectRecord]) -> Result<f64> {
        match *self {
            Bandwidth::Rule(rule) => default_bandwidth(data, rule),
            Bandwidth::Fixed(a) => Ok(a),
        }
    }
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::Rule(BandwidthRule::default())
    }
}

/// Evaluates a set of methods at a set of thresholds.
#[derive(Debug, Clone)]
pub struct Panel {
    pub methods: Vec<Method>,
    pub thresholds: Vec<f64>,
    pub bandwidth: Bandwidth,
    pub kernel: Kernel,
}

/// Parametric starting points reused across resamples.
#[derive(Debug, Clone, Copy, Default)]
struct WarmStarts {
    lognormal: Option<[f64; 2]>,
    loglogistic: Option<[f64; 2]>,
}

impl Panel {
    pub fn new(methods: &[Method], thresholds: &[f64], bandwidth: Bandwidth) -> Self {
        Self {
            methods: methods.to_vec(),
            thresholds: thresholds.to_vec(),
            bandwidth,
            kernel: Kernel::silverman(),
        }
    }

    pub fn width(&self) -> usize {
        self.methods.len() * self.thresholds.len()
    }

    /// Column of `(method, threshold index)` in [`Panel::evaluate`] output.
    pub fn column(&self, method: Method, k: usize) -> Option<usize> {
        self.methods
            .iter()
            .position(|&m| m == method)
            .map(|i| i * self.thresholds.len() + k)
    }

    /// Estimates for one method; errors if it is undefined on `data`.
    pub fn estimate(&self, method: Method, data: &[SubjectRecord]) -> Result<Vec<f64>> {
        self.estimate_warm(method, data, None)
    }

    fn estimate_warm(&self, method: Method, data: &[SubjectRecord], warm: Option<[f64; 2]>) -> Result<Vec<f64>> {
        match method {
            Method::Proposed => {
                let a_n = self.bandwidth.resolve(data)?;
                let curve = GmiFit::new(data, a_n, self.kernel)?.curve();
                Ok(curve.at_many(&self.thresholds))
            }
            Method::Km => Ok(km_naive(data)?.curve.at_many(&self.thresholds)),
            Method::LogNormal | Method::LogLogistic => {
                let fit = aft_fit_from(method.family().unwrap(), data, warm)?;
                if !fit.converged {
                    return Err(GmiError::NonConvergence {
                        grad_norm: fit.grad_norm,
                    });
                }
                Ok(self.thresholds.iter().map(|&r| aft_survival(&fit, r)).collect())
            }
        }
    }

    fn evaluate_warm(&self, data: &[SubjectRecord], warm: &WarmStarts) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        for &m in &self.methods {
            let w = match m {
                Method::LogNormal => warm.lognormal,
                Method::LogLogistic => warm.loglogistic,
                _ => None,
            };
            match self.estimate_warm(m, data, w) {
                Ok(v) => out.extend(v),
                Err(_) => out.extend(std::iter::repeat_n(f64::NAN, self.thresholds.len())),
            }
        }
        out
    }

    /// All methods at all thresholds, method-major; NaN where a method is
    /// undefined on `data`.
    pub fn evaluate(&self, data: &[SubjectRecord]) -> Vec<f64> {
        self.evaluate_warm(data, &WarmStarts::default())
    }

    /// Panel used inside the bootstrap. With `rebandwidth` off the bandwidth
    /// is fixed at its value on the original data.
    fn for_bootstrap(&self, data: &[SubjectRecord], cfg: &BootstrapConfig) -> Result<Panel> {
        let mut p = self.clone();
        if !cfg.rebandwidth && self.methods.contains(&Method::Proposed) {
            p.bandwidth = Bandwidth::Fixed(self.bandwidth.resolve(data)?);
        }
        Ok(p)
    }

    fn warm_starts(&self, data: &[SubjectRecord]) -> WarmStarts {
        let start = |fam| {
            aft_fit_from(fam, data, None)
                .ok()
                .filter(|f| f.converged)
                .map(|f| [f.location, f.scale.ln()])
        };
        WarmStarts {
            lognormal: self
                .methods
                .contains(&Method::LogNormal)
                .then(|| start(AftFamily::LogNormal))
                .flatten(),
            loglogistic: self
                .methods
                .contains(&Method::LogLogistic)
                .then(|| start(AftFamily::LogLogistic))
                .flatten(),
        }
    }

    /// Every bootstrap resample evaluated on the whole panel, in iteration
    /// order. All methods see the same resample within an iteration.
    pub fn bootstrap(&self, data: &[SubjectRecord], cfg: &BootstrapConfig) -> Result<Vec<Vec<f64>>> {
        if cfg.resamples < 2 {
            return Err(GmiError::InvalidParameter(
                "bootstrap needs at least 2 resamples".into(),
            ));
        }
        let panel = self.for_bootstrap(data, cfg)?;
        let warm = self.warm_starts(data);
        Ok(bootstrap_map(data, cfg, |d| panel.evaluate_warm(d, &warm)))
    }

    /// Column-wise bootstrap standard errors.
    pub fn bootstrap_se(&self, data: &[SubjectRecord], cfg: &BootstrapConfig) -> Result<Vec<Option<f64>>> {
        Ok(column_sds(&self.bootstrap(data, cfg)?))
    }
}

/// Estimates of all four methods with Wald comparisons against the proposed
/// estimator.
#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub thresholds: Vec<f64>,
    pub bandwidth: f64,
    pub estimates: Vec<GmiEstimate>,
    pub comparisons: Vec<Comparison>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Comparison {
    pub method: Method,
    pub r: f64,
    pub estimate: f64,
    pub proposed: f64,
    /// `(other - proposed) / proposed`, in percent.
    pub pct_diff: f64,
    pub wald: WaldResult,
}

impl Analysis {
    pub fn get(&self, method: Method, r: f64) -> Option<&GmiEstimate> {
        self.estimates.iter().find(|e| e.method == method && e.r == r)
    }
}

/// Standard errors: bootstrap for the proposed and parametric estimators,
/// Greenwood for Kaplan–Meier. Wald standard errors come from paired
/// bootstrap differences.
pub fn analyze(
    data: &[SubjectRecord],
    thresholds: &[f64],
    bandwidth: Bandwidth,
    cfg: &BootstrapConfig,
    level: f64,
) -> Result<Analysis> {
    let panel = Panel::new(&Method::ALL, thresholds, bandwidth);
    let a_n = bandwidth.resolve(data)?;
    let mut point = Vec::with_capacity(panel.width());
    for &m in &panel.methods {
        point.extend(panel.estimate(m, data)?);
    }
    let boot = panel.bootstrap(data, cfg)?;
    let se = column_sds(&boot);
    let km = km_naive(data)?;
    let undefined = |c: usize| GmiError::BootstrapUndefined {
        defined: boot.iter().filter(|row| row[c].is_finite()).count(),
        resamples: cfg.resamples,
    };

    let mut estimates = Vec::new();
    for &m in &panel.methods {
        for (k, &r) in thresholds.iter().enumerate() {
            let c = panel.column(m, k).unwrap();
            let s = match m {
                Method::Km => km.se_at(r),
                _ => se[c].ok_or_else(|| undefined(c))?,
            };
            estimates.push(GmiEstimate::new(m, r, point[c], s, level));
        }
    }

    let mut comparisons = Vec::new();
    for &m in &panel.methods[1..] {
        for (k, &r) in thresholds.iter().enumerate() {
            let c = panel.column(m, k).unwrap();
            let p = panel.column(Method::Proposed, k).unwrap();
            let diffs = boot.iter().map(|row| row[c] - row[p]);
            let se_diff = sample_sd(diffs).ok_or_else(|| undefined(c))?;
            comparisons.push(Comparison {
                method: m,
                r,
                estimate: point[c],
                proposed: point[p],
                pct_diff: 100.0 * (point[c] - point[p]) / point[p],
                wald: WaldResult::new(point[c] - point[p], se_diff),
            });
        }
    }
    Ok(Analysis {
        thresholds: thresholds.to_vec(),
        bandwidth: a_n,
        estimates,
        comparisons,
    })
}
