//! Subject-level bootstrap, log-log confidence intervals and Wald tests.

use std::f64::consts::SQRT_2;

use libm::erfc;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::SubjectRecord;
use crate::error::{GmiError, Result};
use crate::methods::Method;
use crate::par;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    /// Re-derive the bandwidth from each resample.
    pub rebandwidth: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 5000,
            seed: 20_210_611,
            rebandwidth: true,
        }
    }
}

impl BootstrapConfig {
    pub fn with_resamples(mut self, b: usize) -> Self {
        self.resamples = b;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.resamples < 2 {
            return Err(GmiError::InvalidParameter(format!(
                "bootstrap needs at least 2 resamples, got {}",
                self.resamples
            )));
        }
        if n < 2 {
            return Err(GmiError::TooFewSubjects { needed: 2, got: n });
        }
        Ok(())
    }
}

/// Subject indices of resample `iteration`, drawn with replacement from a
/// stream keyed by `(seed, iteration)`.
pub fn resample_indices(seed: u64, iteration: usize, n: usize) -> Vec<usize> {
    let mut g = rng::stream(seed, iteration as u64);
    (0..n).map(|_| g.random_range(0..n)).collect()
}

pub fn resample(data: &[SubjectRecord], seed: u64, iteration: usize) -> Vec<SubjectRecord> {
    resample_indices(seed, iteration, data.len())
        .into_iter()
        .map(|i| data[i].clone())
        .collect()
}

/// Applies `f` to every bootstrap resample; results are in iteration order.
pub fn bootstrap_map<T, F>(data: &[SubjectRecord], cfg: &BootstrapConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[SubjectRecord]) -> T + Sync + Send,
{
    par::map_indexed(cfg.resamples, |b| f(&resample(data, cfg.seed, b)))
}

/// Sample standard deviation (divisor `m - 1`) of the finite entries.
pub fn sample_sd(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.into_iter().filter(|x| x.is_finite()).collect();
    if v.len() < 2 {
        return None;
    }
    // Shifting by the first entry makes a constant sample exactly zero.
    let d: Vec<f64> = v.iter().map(|x| x - v[0]).collect();
    let m = d.iter().sum::<f64>() / d.len() as f64;
    let ss: f64 = d.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (v.len() - 1) as f64).sqrt())
}

/// Bootstrap standard error of `estimator(data, r)`. Resamples on which the
/// estimator is undefined are dropped.
pub fn bootstrap_se<F>(estimator: F, data: &[SubjectRecord], r: f64, cfg: &BootstrapConfig) -> Result<f64>
where
    F: Fn(&[SubjectRecord], f64) -> Option<f64> + Sync + Send,
{
    cfg.check(data.len())?;
    let est = bootstrap_map(data, cfg, |d| estimator(d, r).unwrap_or(f64::NAN));
    sample_sd(est.iter().copied()).ok_or(GmiError::BootstrapUndefined {
        defined: est.iter().filter(|x| x.is_finite()).count(),
        resamples: cfg.resamples,
    })
}

/// Column-wise bootstrap standard errors of a vector-valued estimator. An
/// undefined estimate is reported as NaN by the estimator.
pub fn bootstrap_se_columns<F>(estimator: F, data: &[SubjectRecord], cfg: &BootstrapConfig) -> Result<Vec<Option<f64>>>
where
    F: Fn(&[SubjectRecord]) -> Vec<f64> + Sync + Send,
{
    cfg.check(data.len())?;
    let rows = bootstrap_map(data, cfg, estimator);
    Ok(column_sds(&rows))
}

pub(crate) fn column_sds(rows: &[Vec<f64>]) -> Vec<Option<f64>> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width).map(|c| sample_sd(rows.iter().map(|r| r[c]))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogCi {
    pub low: f64,
    pub high: f64,
    /// Estimate was 0 or 1, so the interval collapsed to the point.
    pub degenerate: bool,
}

const CLAMP: f64 = 1e-10;

/// Confidence interval built on `log(-log S)`:
/// `S^{exp(±z·se/(S log S))}`, always inside `[0, 1]`.
pub fn loglog_ci(estimate: f64, se: f64, level: f64) -> LogLogCi {
    if !(estimate > 0.0 && estimate < 1.0) || !se.is_finite() {
        let s = estimate.clamp(0.0, 1.0);
        return LogLogCi {
            low: s,
            high: s,
            degenerate: true,
        };
    }
    let s = estimate.clamp(CLAMP, 1.0 - CLAMP);
    let z = normal_quantile(0.5 + level / 2.0);
    let c = z * se / (s * s.ln()).abs();
    LogLogCi {
        low: s.powf(c.exp()).min(estimate),
        high: s.powf((-c).exp()).max(estimate),
        degenerate: false,
    }
}

pub(crate) fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Two-sided standard normal tail probability `2(1 - Φ(|z|))`.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / SQRT_2).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaldResult {
    pub diff: f64,
    pub se_diff: f64,
    pub z: f64,
    pub p: f64,
}

impl WaldResult {
    pub fn new(diff: f64, se_diff: f64) -> Self {
        if diff == 0.0 {
            return Self {
                diff,
                se_diff,
                z: 0.0,
                p: 1.0,
            };
        }
        let z = diff / se_diff;
        Self {
            diff,
            se_diff,
            z,
            p: two_sided_p(z),
        }
    }
}

/// Wald test of `estA - estB`, with the standard error of the difference from
/// a paired bootstrap: both estimators see the same resample in every
/// iteration.
pub fn wald_difference<FA, FB>(
    est_a: FA,
    est_b: FB,
    data: &[SubjectRecord],
    cfg: &BootstrapConfig,
) -> Result<WaldResult>
where
    FA: Fn(&[SubjectRecord]) -> Option<f64> + Sync + Send,
    FB: Fn(&[SubjectRecord]) -> Option<f64> + Sync + Send,
{
    cfg.check(data.len())?;
    let invalid = |what: &str| GmiError::InvalidParameter(format!("{what} estimator undefined on the full data"));
    let a = est_a(data).ok_or_else(|| invalid("first"))?;
    let b = est_b(data).ok_or_else(|| invalid("second"))?;
    let diffs = bootstrap_map(data, cfg, |d| match (est_a(d), est_b(d)) {
        (Some(x), Some(y)) => x - y,
        _ => f64::NAN,
    });
    let se = sample_sd(diffs.iter().copied()).ok_or(GmiError::BootstrapUndefined {
        defined: diffs.iter().filter(|x| x.is_finite()).count(),
        resamples: cfg.resamples,
    })?;
    Ok(WaldResult::new(a - b, se))
}

/// Point estimate with standard error and log-log interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmiEstimate {
    pub method: Method,
    pub r: f64,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl GmiEstimate {
    pub fn new(method: Method, r: f64, estimate: f64, se: f64, level: f64) -> Self {
        let ci = loglog_ci(estimate, se, level);
        Self {
            method,
            r,
            estimate,
            se,
            ci_low: ci.low,
            ci_high: ci.high,
        }
    }

    pub fn covers(&self, truth: f64) -> bool {
        self.ci_low <= truth && truth <= self.ci_high
    }
}
