use std::f64::consts::{PI, SQRT_2};

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::data::SubjectRecord;
use crate::error::{GmiError, Result};

use super::simplex::nelder_mead_max;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AftFamily {
    LogNormal,
    LogLogistic,
}

/// Location-scale fit on the log-ratio scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AftFit {
    pub family: AftFamily,
    pub location: f64,
    pub scale: f64,
    pub converged: bool,
    pub loglik: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Log ratios and event flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRatioData {
    pub y: Vec<f64>,
    pub event: Vec<bool>,
}

impl LogRatioData {
    pub fn from_records(data: &[SubjectRecord]) -> Self {
        Self {
            y: data.iter().map(|r| r.ratio().ln()).collect(),
            event: data.iter().map(|r| r.delta1).collect(),
        }
    }

    fn events(&self) -> usize {
        self.event.iter().filter(|&&e| e).count()
    }
}

const LOG_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const GRAD_TOL: f64 = 1e-8;
const MAX_NEWTON: usize = 200;

/// Log standard density `g`, log standard survival `h` and their first two
/// derivatives at `z`.
#[derive(Debug, Clone, Copy)]
struct Pieces {
    g: f64,
    g1: f64,
    g2: f64,
    h: f64,
    h1: f64,
    h2: f64,
}

fn log_upper_normal(z: f64) -> (f64, f64) {
    // (log Q(z), Mills ratio φ(z)/Q(z))
    if z < 30.0 {
        let q = 0.5 * erfc(z / SQRT_2);
        let log_phi = -0.5 * z * z - LOG_SQRT_2PI;
        (q.ln(), (log_phi - q.ln()).exp())
    } else {
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        let log_q = -0.5 * z2 - LOG_SQRT_2PI - z.ln() + series.ln();
        (log_q, z / series)
    }
}

fn pieces(family: AftFamily, z: f64) -> Pieces {
    match family {
        AftFamily::LogNormal => {
            let (log_q, mills) = log_upper_normal(z);
            Pieces {
                g: -0.5 * z * z - LOG_SQRT_2PI,
                g1: -z,
                g2: -1.0,
                h: log_q,
                h1: -mills,
                h2: -mills * (mills - z),
            }
        }
        AftFamily::LogLogistic => {
            let p = 1.0 / (1.0 + (-z).exp());
            let softplus = if z > 0.0 {
                z + (-z).exp().ln_1p()
            } else {
                z.exp().ln_1p()
            };
            let a = z.abs();
            Pieces {
                g: -a - 2.0 * (-a).exp().ln_1p(),
                g1: 1.0 - 2.0 * p,
                g2: -2.0 * p * (1.0 - p),
                h: -softplus,
                h1: -p,
                h2: -p * (1.0 - p),
            }
        }
    }
}

/// Censored log-likelihood `Σ δ log f + (1-δ) log S` on the log-ratio scale,
/// parameterised by `(location, log scale)`.
pub fn censored_loglik(family: AftFamily, d: &LogRatioData, location: f64, log_scale: f64) -> f64 {
    let inv = (-log_scale).exp();
    d.y.iter()
        .zip(&d.event)
        .map(|(&y, &e)| {
            let p = pieces(family, (y - location) * inv);
            if e {
                p.g - log_scale
            } else {
                p.h
            }
        })
        .sum()
}

/// Analytic gradient of [`censored_loglik`] in `(location, log scale)`.
pub fn censored_gradient(family: AftFamily, d: &LogRatioData, location: f64, log_scale: f64) -> [f64; 2] {
    derivatives(family, d, location, log_scale).1
}

fn derivatives(family: AftFamily, d: &LogRatioData, location: f64, log_scale: f64) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let inv = (-log_scale).exp();
    let mut ll = 0.0;
    let mut gr = [0.0; 2];
    let mut he = [[0.0; 2]; 2];
    for (&y, &e) in d.y.iter().zip(&d.event) {
        let z = (y - location) * inv;
        let p = pieces(family, z);
        let (v, d1, d2) = if e {
            (p.g - log_scale, p.g1, p.g2)
        } else {
            (p.h, p.h1, p.h2)
        };
        ll += v;
        gr[0] += -d1 * inv;
        gr[1] += -z * d1 - if e { 1.0 } else { 0.0 };
        he[0][0] += d2 * inv * inv;
        he[0][1] += (z * d2 + d1) * inv;
        he[1][1] += z * d1 + z * z * d2;
    }
    he[1][0] = he[0][1];
    (ll, gr, he)
}

fn inf_norm(g: [f64; 2]) -> f64 {
    g[0].abs().max(g[1].abs())
}

fn starting_values(family: AftFamily, d: &LogRatioData) -> [f64; 2] {
    let obs: Vec<f64> = d.y.iter().zip(&d.event).filter(|(_, &e)| e).map(|(&y, _)| y).collect();
    let moments = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        (m, v.sqrt())
    };
    let (mut m, mut sd) = moments(&obs);
    if sd.is_nan() || sd <= 0.0 {
        let all = moments(&d.y);
        m = all.0;
        sd = if all.1 > 0.0 { all.1 } else { 1.0 };
    }
    let scale = match family {
        AftFamily::LogNormal => sd,
        AftFamily::LogLogistic => sd * 3f64.sqrt() / PI,
    };
    [m, scale.ln()]
}

/// Newton–Raphson with step halving; returns the final point and whether the
/// gradient tolerance was met.
fn newton(family: AftFamily, d: &LogRatioData, start: [f64; 2]) -> ([f64; 2], bool, usize) {
    let mut x = start;
    let (mut ll, mut g, mut h) = derivatives(family, d, x[0], x[1]);
    if !ll.is_finite() {
        return (x, false, 0);
    }
    for it in 0..MAX_NEWTON {
        if inf_norm(g) < GRAD_TOL {
            return (x, true, it);
        }
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let dir = if h[0][0] < 0.0 && det > 0.0 {
            [
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            ]
        } else {
            // Not concave here: steepest ascent with a bounded step.
            let norm = inf_norm(g).max(1.0);
            [g[0] / norm, g[1] / norm]
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = [x[0] + step * dir[0], x[1] + step * dir[1]];
            let (cl, cg, ch) = derivatives(family, d, cand[0], cand[1]);
            let near_optimum = inf_norm(g) < 1e-4 && inf_norm(cg) < inf_norm(g);
            if cl.is_finite() && (cl > ll || near_optimum) {
                x = cand;
                ll = cl;
                g = cg;
                h = ch;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return (x, inf_norm(g) < GRAD_TOL, it);
        }
    }
    (x, inf_norm(g) < GRAD_TOL, MAX_NEWTON)
}

/// Censored maximum likelihood fit of a lognormal or loglogistic model to the
/// observed ratios, starting from moments of the uncensored log ratios.
pub fn aft_fit(family: AftFamily, data: &[SubjectRecord]) -> Result<AftFit> {
    aft_fit_from(family, data, None)
}

/// As [`aft_fit`], optionally warm-started at `(location, log scale)`.
pub fn aft_fit_from(family: AftFamily, data: &[SubjectRecord], start: Option<[f64; 2]>) -> Result<AftFit> {
    let d = LogRatioData::from_records(data);
    let events = d.events();
    if events < 2 {
        return Err(GmiError::TooFewEvents {
            needed: 2,
            found: events,
        });
    }
    let start = start.unwrap_or_else(|| starting_values(family, &d));
    let (mut x, mut ok, mut iters) = newton(family, &d, start);
    if !ok {
        let ll = |p: [f64; 2]| censored_loglik(family, &d, p[0], p[1]);
        let from = if ll(x).is_finite() {
            x
        } else {
            starting_values(family, &d)
        };
        let polished = nelder_mead_max(ll, from, 0.25, 2000);
        let (x2, ok2, it2) = newton(family, &d, polished);
        x = x2;
        ok = ok2;
        iters += it2;
    }
    let (loglik, g, _) = derivatives(family, &d, x[0], x[1]);
    Ok(AftFit {
        family,
        location: x[0],
        scale: x[1].exp(),
        converged: ok,
        loglik,
        grad_norm: inf_norm(g),
        iterations: iters,
    })
}

/// Fitted `P(ratio > r)`.
pub fn aft_survival(fit: &AftFit, r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    let z = (r.ln() - fit.location) / fit.scale;
    match fit.family {
        AftFamily::LogNormal => 0.5 * erfc(z / SQRT_2),
        AftFamily::LogLogistic => 1.0 / (1.0 + z.exp()),
    }
}
