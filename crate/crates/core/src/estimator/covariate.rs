use serde::Serialize;

use crate::data::SubjectRecord;
use crate::error::{GmiError, Result};

use super::gmi::GmiFit;
use super::kernel::Kernel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StratumWarning {
    /// The categorical level has a single subject; its conditional curve is
    /// that subject's own one-point product-limit curve.
    Singleton { level: Vec<String> },
    /// No event at or below the requested threshold within the level.
    NoEventsAtOrBelow { level: Vec<String>, r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateEstimate {
    pub estimate: f64,
    pub warnings: Vec<StratumWarning>,
}

const MAX_CONTINUOUS: usize = 2;

/// Covariate-adjusted estimate of `S_G(r)`.
///
/// Subject `i`'s conditional curve uses only subjects in the same categorical
/// stratum, weighted by `K(‖(X_j - X_i)/a_n‖)` with `X = (log t0, z)`. With no
/// covariates this reproduces [`super::survival_gmi`] bit for bit.
pub fn covariate_survival_gmi(r: f64, data: &[SubjectRecord], a_n: f64, kernel: Kernel) -> Result<CovariateEstimate> {
    let fit = GmiFit::new(data, a_n, kernel)?;
    let q = data[0].z.len();
    if q > MAX_CONTINUOUS {
        return Err(GmiError::CovariateDimension(q));
    }

    let curve = fit.averaged_curve(|i, w| {
        let xi = &data[i];
        let lt = fit.log_t0[i];
        w.clear();
        w.extend(fit.index.order.iter().map(|&j| {
            let xj = &data[j];
            if xj.v != xi.v {
                return 0.0;
            }
            let u0 = (fit.log_t0[j] - lt) / a_n;
            let norm = if q == 0 {
                u0.abs()
            } else {
                let mut ss = u0 * u0;
                for (zj, zi) in xj.z.iter().zip(&xi.z) {
                    let u = (zj - zi) / a_n;
                    ss += u * u;
                }
                ss.sqrt()
            };
            kernel.eval(norm)
        }));
    });

    let warnings = stratum_warnings(data, r);
    for w in &warnings {
        log::warn!("{w:?}");
    }
    Ok(CovariateEstimate {
        estimate: curve.at(r),
        warnings,
    })
}

fn stratum_warnings(data: &[SubjectRecord], r: f64) -> Vec<StratumWarning> {
    if data[0].v.is_empty() {
        return Vec::new();
    }
    let mut levels: Vec<&Vec<String>> = data.iter().map(|d| &d.v).collect();
    levels.sort();
    levels.dedup();
    let mut out = Vec::new();
    for level in levels {
        let members: Vec<&SubjectRecord> = data.iter().filter(|d| &d.v == level).collect();
        if members.len() == 1 {
            out.push(StratumWarning::Singleton { level: level.clone() });
        }
        if !members.iter().any(|d| d.delta1 && d.ratio() <= r) {
            out.push(StratumWarning::NoEventsAtOrBelow {
                level: level.clone(),
                r,
            });
        }
    }
    out
}
