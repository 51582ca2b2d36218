use serde::Serialize;

use crate::curve::SurvivalCurve;
use crate::data::SubjectRecord;
use crate::error::{GmiError, Result};

/// Product-limit curve of the censored ratios with Greenwood variance at
/// each jump.
#[derive(Debug, Clone, Serialize)]
pub struct KmCurve {
    pub curve: SurvivalCurve,
    /// Greenwood variance on `[thresholds[k], thresholds[k+1])`.
    pub variance: Vec<f64>,
}

impl KmCurve {
    pub fn at(&self, r: f64) -> f64 {
        self.curve.at(r)
    }

    /// Variance at `r`; zero before the first jump and carried after the last.
    pub fn variance_at(&self, r: f64) -> f64 {
        self.curve.jump_index(r).map_or(0.0, |k| self.variance[k])
    }

    pub fn se_at(&self, r: f64) -> f64 {
        self.variance_at(r).sqrt()
    }
}

/// Kaplan–Meier estimator on `(y1/t0, delta1)`, ignoring the dependence of
/// the censoring ratio on `t0`.
pub fn km_naive(data: &[SubjectRecord]) -> Result<KmCurve> {
    if data.is_empty() {
        return Err(GmiError::TooFewSubjects { needed: 1, got: 0 });
    }
    let mut obs: Vec<(f64, bool)> = data.iter().map(|r| (r.ratio(), r.delta1)).collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut at_risk = obs.len();
    let mut s = 1.0;
    let mut gw_sum = 0.0;
    let mut exhausted = false;
    let mut thresholds = Vec::new();
    let mut values = Vec::new();
    let mut variance = Vec::new();
    let mut k = 0;
    while k < obs.len() {
        let ratio = obs[k].0;
        let mut end = k;
        let mut d = 0usize;
        while end < obs.len() && obs[end].0 == ratio {
            d += obs[end].1 as usize;
            end += 1;
        }
        if d > 0 {
            let (nr, dr) = (at_risk as f64, d as f64);
            s *= 1.0 - dr / nr;
            if d == at_risk {
                exhausted = true;
            } else {
                gw_sum += dr / (nr * (nr - dr));
            }
            thresholds.push(ratio);
            values.push(s);
            // The curve is zero once the risk set is exhausted; its variance is zero too.
            variance.push(if exhausted { 0.0 } else { s * s * gw_sum });
        }
        at_risk -= end - k;
        k = end;
    }
    Ok(KmCurve {
        curve: SurvivalCurve::new(thresholds, values),
        variance,
    })
}
