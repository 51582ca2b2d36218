use serde::{Deserialize, Serialize};

use crate::error::{GmiError, Result};
use crate::par;
use crate::rng;

use super::model::FrailtyModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub samples: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            samples: 200_000,
            seed: 0x6A11_B8A7,
            max_iter: 80,
        }
    }
}

const ALPHA_BRACKET: (f64, f64) = (0.01, 100.0);
const CORR_TOL: f64 = 0.005;
const CENS_TOL: f64 = 0.002;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCalibration {
    pub alpha: f64,
    pub achieved: f64,
    /// `(alpha, correlation)` at every evaluation, bracket ends first.
    pub trace: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauCalibration {
    pub tau: f64,
    pub achieved: f64,
    pub trace: Vec<(f64, f64)>,
}

fn pearson(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let (mx, my) = xy.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in xy {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Pearson correlation of `(T0, T1)` over `samples` draws. Draw `i` always
/// comes from stream `(seed, i)`, so evaluations at different `α` share
/// their random numbers.
pub fn frailty_correlation(model: &FrailtyModel, samples: usize, seed: u64) -> f64 {
    let s = model.sampler();
    let pairs = par::map_indexed(samples, |i| s.sample(&mut rng::stream(seed, i as u64)));
    pearson(&pairs)
}

/// Finds the frailty shape giving `corr(T0, T1) = target` by bisection on
/// `log α` over `[0.01, 100]`. Correlation decreases in `α`.
pub fn calibrate_alpha(
    mu: f64,
    sigma: f64,
    ratio: f64,
    target: f64,
    cfg: &CalibrationConfig,
) -> Result<AlphaCalibration> {
    if !(target > 0.0 && target < 1.0) {
        return Err(GmiError::InvalidParameter(format!(
            "target correlation must be in (0,1), got {target}"
        )));
    }
    let base = FrailtyModel::new(mu, sigma, ratio, 1.0)?;
    let corr = |alpha: f64| frailty_correlation(&base.with_alpha(alpha), cfg.samples, cfg.seed);

    let (mut lo, mut hi) = (ALPHA_BRACKET.0.ln(), ALPHA_BRACKET.1.ln());
    let c_lo = corr(ALPHA_BRACKET.0);
    let c_hi = corr(ALPHA_BRACKET.1);
    let mut trace = vec![(ALPHA_BRACKET.0, c_lo), (ALPHA_BRACKET.1, c_hi)];
    if !(c_hi <= target && target <= c_lo) {
        return Err(GmiError::CalibrationBracket {
            target,
            low: c_hi,
            high: c_lo,
        });
    }
    let mut best = if (c_lo - target).abs() < (c_hi - target).abs() {
        trace[0]
    } else {
        trace[1]
    };
    for _ in 0..cfg.max_iter {
        let mid = 0.5 * (lo + hi);
        let alpha = mid.exp();
        let c = corr(alpha);
        trace.push((alpha, c));
        if (c - target).abs() < (best.1 - target).abs() {
            best = (alpha, c);
        }
        if (c - target).abs() < CORR_TOL {
            break;
        }
        if c > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(AlphaCalibration {
        alpha: best.0,
        achieved: best.1,
        trace,
    })
}

fn sample_t1(model: &FrailtyModel, samples: usize, seed: u64) -> Vec<f64> {
    let s = model.sampler();
    par::map_indexed(samples, |i| s.sample(&mut rng::stream(seed, i as u64)).1)
}

// P(C1 < t) for C1 ~ Uniform(0.85 τ, τ).
#[inline]
fn censor_prob(t: f64, tau: f64) -> f64 {
    ((t - 0.85 * tau) / (0.15 * tau)).clamp(0.0, 1.0)
}

fn rate_given(t1: &[f64], tau: f64) -> f64 {
    t1.iter().map(|&t| censor_prob(t, tau)).sum::<f64>() / t1.len() as f64
}

/// Monte Carlo estimate of `P(C1 < T1)` for horizon `tau`. The uniform
/// censoring time is integrated out exactly given each simulated `T1`.
pub fn censoring_rate(model: &FrailtyModel, tau: f64, samples: usize, seed: u64) -> f64 {
    rate_given(&sample_t1(model, samples, seed), tau)
}

/// Finds the censoring horizon `τ` giving the target censoring rate by
/// bisection on `log τ`; the rate is nonincreasing in `τ`.
pub fn calibrate_tau(model: &FrailtyModel, target: f64, cfg: &CalibrationConfig) -> Result<TauCalibration> {
    if !(target > 0.0 && target < 1.0) {
        return Err(GmiError::InvalidParameter(format!(
            "target censoring rate must be in (0,1), got {target}"
        )));
    }
    let t1 = sample_t1(model, cfg.samples, cfg.seed);
    let (min, max) = t1
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
    let (tau_lo, tau_hi) = ((0.5 * min).max(f64::MIN_POSITIVE), 2.0 * max / 0.85);
    let (r_lo, r_hi) = (rate_given(&t1, tau_lo), rate_given(&t1, tau_hi));
    let mut trace = vec![(tau_lo, r_lo), (tau_hi, r_hi)];
    if !(r_hi <= target && target <= r_lo) {
        return Err(GmiError::CalibrationBracket {
            target,
            low: r_hi,
            high: r_lo,
        });
    }
    let (mut lo, mut hi) = (tau_lo.ln(), tau_hi.ln());
    let mut best = trace[0];
    for _ in 0..cfg.max_iter {
        let mid = 0.5 * (lo + hi);
        let tau = mid.exp();
        let r = rate_given(&t1, tau);
        trace.push((tau, r));
        if (r - target).abs() < (best.1 - target).abs() {
            best = (tau, r);
        }
        if (r - target).abs() < CENS_TOL {
            break;
        }
        if r > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TauCalibration {
        tau: best.0,
        achieved: best.1,
        trace,
    })
}
