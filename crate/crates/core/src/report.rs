//! Tables and exports produced by the command line tool.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::baselines::km_naive;
use crate::data::SubjectRecord;
use crate::error::Result;
use crate::methods::{Analysis, Bandwidth, Method, Panel};
use crate::uncertainty::{BootstrapConfig, GmiEstimate};

/// Flat row of the estimate table.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub method: Method,
    pub r: f64,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub pct_diff: Option<f64>,
    pub p_value: Option<f64>,
}

pub fn estimate_rows(a: &Analysis) -> Vec<EstimateRow> {
    a.estimates
        .iter()
        .map(|e| {
            let cmp = a.comparisons.iter().find(|c| c.method == e.method && c.r == e.r);
            EstimateRow {
                method: e.method,
                r: e.r,
                estimate: e.estimate,
                se: e.se,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                pct_diff: cmp.map(|c| c.pct_diff),
                p_value: cmp.map(|c| c.wald.p),
            }
        })
        .collect()
}

pub fn write_rows_csv<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Estimated `P(GMI > r)` per method and threshold with the percentage
/// difference from the proposed estimator and the Wald p-value.
pub fn format_estimate_table(a: &Analysis) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<12}", "Method");
    for r in &a.thresholds {
        let _ = write!(s, " | {:^24}", format!("GMI > {r}"));
    }
    s.push('\n');
    let _ = write!(s, "{:<12}", "");
    for _ in &a.thresholds {
        let _ = write!(s, " | {:<15} {:>8}", "Est (%Dif)", "p-value");
    }
    s.push('\n');
    for m in Method::ALL {
        let _ = write!(s, "{:<12}", row_label(m));
        for &r in &a.thresholds {
            let est = a.get(m, r).map_or(f64::NAN, |e| e.estimate);
            let cmp = a.comparisons.iter().find(|c| c.method == m && c.r == r);
            let (dif, p) = match cmp {
                Some(c) => (format!("{:.1}", c.pct_diff), format!("{:.3}", c.wald.p)),
                None => ("---".to_string(), "---".to_string()),
            };
            let _ = write!(s, " | {:<15} {:>8}", format!("{est:.3} ({dif})"), p);
        }
        s.push('\n');
    }
    s
}

fn row_label(m: Method) -> &'static str {
    match m {
        Method::Proposed => "Proposed",
        Method::Km => "KM",
        Method::LogNormal => "lognormal",
        Method::LogLogistic => "loglogistic",
    }
}

pub fn format_comparisons(a: &Analysis) -> String {
    let mut s = format!(
        "{:<12} {:>6} {:>9} {:>9} {:>9} {:>8} {:>8}\n",
        "method", "r", "estimate", "proposed", "diff", "z", "p-value"
    );
    for c in &a.comparisons {
        let _ = writeln!(
            s,
            "{:<12} {:>6} {:>9.3} {:>9.3} {:>9.3} {:>8.3} {:>8.3}",
            c.method.name(),
            c.r,
            c.estimate,
            c.proposed,
            c.wald.diff,
            c.wald.z,
            c.wald.p
        );
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub method: Method,
    pub r: f64,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Step curves of every method on the grid of distinct event ratios.
#[derive(Debug, Clone, Serialize)]
pub struct CurveExport {
    pub rows: Vec<CurveRow>,
}

pub const CURVE_HEADER_NOTE: &str =
    "# step function: each estimate holds on [r, next r) for its method; the curve is 1 below the first r";

/// Builds the export. The proposed and parametric intervals use bootstrap
/// standard errors, Kaplan–Meier uses Greenwood.
pub fn curve_export(
    data: &[SubjectRecord],
    bandwidth: Bandwidth,
    cfg: &BootstrapConfig,
    level: f64,
) -> Result<CurveExport> {
    let mut grid: Vec<f64> = data.iter().filter(|r| r.delta1).map(SubjectRecord::ratio).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let boot_methods = [Method::Proposed, Method::LogNormal, Method::LogLogistic];
    let panel = Panel::new(&boot_methods, &grid, bandwidth);
    let se = panel.bootstrap_se(data, cfg)?;
    let km = km_naive(data)?;

    let mut rows = Vec::new();
    for m in Method::ALL {
        let (est, ses): (Vec<f64>, Vec<f64>) = if m == Method::Km {
            (km.curve.at_many(&grid), grid.iter().map(|&r| km.se_at(r)).collect())
        } else {
            let est = panel.estimate(m, data)?;
            let ses = (0..grid.len())
                .map(|k| se[panel.column(m, k).unwrap()].unwrap_or(f64::NAN))
                .collect();
            (est, ses)
        };
        for (k, &r) in grid.iter().enumerate() {
            let e = GmiEstimate::new(m, r, est[k], ses[k], level);
            rows.push(CurveRow {
                method: m,
                r,
                estimate: e.estimate,
                se: e.se,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
            });
        }
    }
    Ok(CurveExport { rows })
}

pub fn write_curve_csv<W: Write>(export: &CurveExport, mut out: W) -> Result<()> {
    writeln!(out, "{CURVE_HEADER_NOTE}")?;
    write_rows_csv(&export.rows, out)
}
