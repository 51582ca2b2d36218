//! Brute-force reference evaluators, coded directly from the estimator
//! formulas with plain loops and no shared code paths with the library.
#![allow(dead_code)]

use gmisurv::rng;
use gmisurv::SubjectRecord;
use rand::Rng;

/// Unnormalized modified Silverman kernel. The normalization cancels in every
/// estimator below.
pub fn kernel_raw(u: f64) -> f64 {
    let a = u.abs() / std::f64::consts::SQRT_2;
    (0.5 * (-a).exp() * (a + std::f64::consts::FRAC_PI_4).sin()).abs()
}

fn ratio(rec: &SubjectRecord) -> f64 {
    rec.y1 / rec.t0
}

fn distinct_event_ratios_upto(data: &[SubjectRecord], r: f64) -> Vec<f64> {
    let mut s: Vec<f64> = data
        .iter()
        .filter(|d| d.delta1)
        .map(ratio)
        .filter(|&x| x <= r)
        .collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.dedup();
    s
}

/// Weighted product-limit value at `r` with explicit per-subject weights.
pub fn weighted_km(r: f64, data: &[SubjectRecord], w: &[f64]) -> f64 {
    let mut prod = 1.0;
    for s in distinct_event_ratios_upto(data, r) {
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, d) in data.iter().enumerate() {
            if ratio(d) == s && d.delta1 {
                num += w[j];
            }
            if ratio(d) >= s {
                den += w[j];
            }
        }
        if den > 0.0 {
            prod *= 1.0 - num / den;
        }
    }
    prod
}

fn log_t0_weights(t0: f64, data: &[SubjectRecord], a_n: f64) -> Vec<f64> {
    data.iter().map(|d| kernel_raw((d.t0.ln() - t0.ln()) / a_n)).collect()
}

/// Conditional estimator at `t0`.
pub fn eq1(r: f64, t0: f64, data: &[SubjectRecord], a_n: f64) -> f64 {
    weighted_km(r, data, &log_t0_weights(t0, data, a_n))
}

/// Average of the conditional estimator over the subjects' own `t0`.
pub fn eq2(r: f64, data: &[SubjectRecord], a_n: f64) -> f64 {
    let n = data.len() as f64;
    data.iter().map(|d| eq1(r, d.t0, data, a_n)).sum::<f64>() / n
}

/// Covariate-adjusted estimator: same categorical level, Euclidean kernel
/// distance on `(log t0, z)`.
pub fn s_tilde(r: f64, data: &[SubjectRecord], a_n: f64) -> f64 {
    let n = data.len() as f64;
    let mut total = 0.0;
    for di in data {
        let w: Vec<f64> = data
            .iter()
            .map(|dj| {
                if dj.v != di.v {
                    return 0.0;
                }
                let mut ss = ((dj.t0.ln() - di.t0.ln()) / a_n).powi(2);
                for k in 0..di.z.len() {
                    ss += ((dj.z[k] - di.z[k]) / a_n).powi(2);
                }
                kernel_raw(ss.sqrt())
            })
            .collect();
        total += weighted_km(r, data, &w);
    }
    total / n
}

/// Influence values, term by term:
///
/// `ξ_i = S_i(r) {1 - Δ_i I(s_i ≤ r) / ((1-h(s_i)) H(s_i)) + Σ_{g ≤ r} I(s_i ≥ g) h_g / ((1-h_g) H_g)} - S_G(r)`
///
/// where `h_g` is the weighted hazard jump and `H_g` the weighted at-risk
/// fraction at `t0_i`. When some `h_g = 1` the factor `S_i(r)/(1-h_g)` is
/// evaluated as the product over the other jumps.
pub fn eq3(r: f64, data: &[SubjectRecord], a_n: f64) -> Vec<f64> {
    let s_g = eq2(r, data, a_n);
    let jumps = distinct_event_ratios_upto(data, r);
    data.iter()
        .map(|di| {
            let w = log_t0_weights(di.t0, data, a_n);
            let total: f64 = w.iter().sum();
            let mut h = Vec::new();
            let mut big_h = Vec::new();
            for &s in &jumps {
                let mut num = 0.0;
                let mut den = 0.0;
                for (j, d) in data.iter().enumerate() {
                    if ratio(d) == s && d.delta1 {
                        num += w[j];
                    }
                    if ratio(d) >= s {
                        den += w[j];
                    }
                }
                h.push(num / den);
                big_h.push(den / total);
            }
            let s_i: f64 = h.iter().map(|x| 1.0 - x).product();
            let without = |g: usize| -> f64 { (0..h.len()).filter(|&l| l != g).map(|l| 1.0 - h[l]).product() };
            let si = ratio(di);
            let mut value = s_i;
            for (g, &s) in jumps.iter().enumerate() {
                if si < s {
                    continue;
                }
                let dn = if di.delta1 && si == s { 1.0 } else { 0.0 };
                value -= without(g) * (dn - h[g]) / big_h[g];
            }
            value - s_g
        })
        .collect()
}

/// Random dataset of `n` subjects on a coarse integer grid so that ratio ties
/// occur regularly.
pub fn random_dataset(seed: u64, n: usize, q: usize, levels: usize) -> Vec<SubjectRecord> {
    let mut rng = rng::stream(seed, 0);
    loop {
        let data: Vec<SubjectRecord> = (0..n)
            .map(|_| {
                let t0 = rng.random_range(1..=6) as f64;
                let y1 = rng.random_range(1..=12) as f64;
                let delta = rng.random_bool(0.7);
                let z = (0..q).map(|_| rng.random_range(-1.5..1.5)).collect();
                let v = if levels > 0 {
                    vec![rng.random_range(0..levels).to_string()]
                } else {
                    Vec::new()
                };
                SubjectRecord::new(t0, y1, delta).with_covariates(z, v)
            })
            .collect();
        let distinct_t0 = data.iter().any(|d| d.t0 != data[0].t0);
        if data.iter().any(|d| d.delta1) && distinct_t0 {
            return data;
        }
    }
}

/// Thresholds probing every jump, points between jumps and beyond the last.
pub fn probe_thresholds(data: &[SubjectRecord]) -> Vec<f64> {
    let mut rs: Vec<f64> = data.iter().map(ratio).collect();
    rs.extend(data.iter().map(|d| ratio(d) * 0.999));
    rs.extend([0.0, 0.05, 100.0]);
    rs
}

pub struct OracleMismatch {
    pub seed: u64,
    pub what: &'static str,
    pub r: f64,
    pub got: f64,
    pub want: f64,
}

/// Compares every estimator with its oracle on one random dataset; returns
/// the worst absolute discrepancy or the first mismatch above `tol`.
pub fn check_dataset(seed: u64, tol: f64) -> Result<f64, OracleMismatch> {
    use gmisurv::estimator::{
        conditional_survival_gmi, covariate_survival_gmi, influence_values, survival_gmi, BandwidthRule, GmiFit, Kernel,
    };
    let mut rng = rng::stream(seed, 1);
    let n = rng.random_range(2..=6);
    let q = rng.random_range(0..=2);
    let levels = rng.random_range(0..=2);
    let data = random_dataset(seed, n, q, levels);
    let k = Kernel::silverman();
    let a_n = if rng.random_bool(0.5) {
        GmiFit::with_rule(&data, BandwidthRule::default(), k)
            .unwrap()
            .bandwidth()
    } else {
        rng.random_range(0.2..3.0)
    };

    let mut worst: f64 = 0.0;
    let mut cmp = |what: &'static str, r: f64, got: f64, want: f64| -> Result<(), OracleMismatch> {
        let e = (got - want).abs();
        worst = worst.max(e);
        if e > tol || !got.is_finite() {
            return Err(OracleMismatch {
                seed,
                what,
                r,
                got,
                want,
            });
        }
        Ok(())
    };

    for r in probe_thresholds(&data) {
        for d in &data {
            cmp(
                "eq1",
                r,
                conditional_survival_gmi(r, d.t0, &data, a_n, k).unwrap(),
                eq1(r, d.t0, &data, a_n),
            )?;
        }
        cmp("eq2", r, survival_gmi(r, &data, a_n, k).unwrap(), eq2(r, &data, a_n))?;
        let xi = influence_values(r, &data, a_n, k).unwrap().xi;
        for (got, want) in xi.iter().zip(eq3(r, &data, a_n)) {
            cmp("eq3", r, *got, want)?;
        }
        cmp(
            "s_tilde",
            r,
            covariate_survival_gmi(r, &data, a_n, k).unwrap().estimate,
            s_tilde(r, &data, a_n),
        )?;
    }
    Ok(worst)
}
