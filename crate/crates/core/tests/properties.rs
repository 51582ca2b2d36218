use std::path::Path;

use gmisurv::baselines::{aft_fit, censored_gradient, censored_loglik, km_naive, AftFamily, LogRatioData};
use gmisurv::estimator::{
    conditional_survival_gmi, covariate_survival_gmi, silverman_kernel, survival_gmi, survival_gmi_curve, GmiFit,
    Kernel,
};
use gmisurv::io::{parse_csv_reader, restrict_followup, write_csv, ColumnMap, Dataset};
use gmisurv::uncertainty::{loglog_ci, two_sided_p, WaldResult};
use gmisurv::{SubjectRecord, SurvivalCurve};
use proptest::prelude::*;

fn k() -> Kernel {
    Kernel::silverman()
}

prop_compose! {
    fn record()(t0 in 0.5f64..40.0, ratio in 0.05f64..6.0, delta in prop::bool::weighted(0.75)) -> SubjectRecord {
        SubjectRecord::new(t0, t0 * ratio, delta)
    }
}

prop_compose! {
    /// Continuous data; at least one event and two distinct `t0`.
    fn dataset(max_n: usize)(mut recs in prop::collection::vec(record(), 3..max_n)) -> Vec<SubjectRecord> {
        recs[0].delta1 = true;
        if recs.iter().all(|r| r.t0 == recs[0].t0) {
            recs[1].t0 *= 1.5;
        }
        recs
    }
}

prop_compose! {
    /// Integer grid data with frequent ties.
    fn tied_dataset()(cells in prop::collection::vec((1u8..5, 1u8..9, any::<bool>()), 3..12)) -> Vec<SubjectRecord> {
        let mut recs: Vec<SubjectRecord> =
            cells.iter().map(|&(t, y, d)| SubjectRecord::new(t as f64, y as f64, d)).collect();
        recs[0].delta1 = true;
        recs
    }
}

/// Nonincreasing, in `[0, 1]`, `S(0) = 1`, right-continuous at every jump.
fn assert_curve(c: &SurvivalCurve) -> Result<(), TestCaseError> {
    prop_assert!(c.is_valid());
    prop_assert_eq!(c.at(0.0), 1.0);
    let mut prev = 1.0;
    for (k, (&t, &v)) in c.thresholds().iter().zip(c.values()).enumerate() {
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(v <= prev);
        prop_assert_eq!(c.at(t), v);
        let before = if k == 0 { 1.0 } else { c.values()[k - 1] };
        prop_assert_eq!(c.at(t - t * 1e-12), before);
        prev = v;
    }
    for w in c.thresholds().windows(2) {
        prop_assert!(w[0] < w[1]);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn averaged_curve_is_valid(data in dataset(30), a_n in 0.05f64..5.0) {
        let curve = survival_gmi_curve(&data, a_n, k()).unwrap();
        assert_curve(&curve)?;
        for r in [0.3, 1.0, 1.3, 2.5] {
            prop_assert!((curve.at(r) - survival_gmi(r, &data, a_n, k()).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn tied_curves_are_valid(data in tied_dataset(), a_n in 0.1f64..3.0) {
        let fit = GmiFit::new(&data, a_n, k()).unwrap();
        assert_curve(&fit.curve())?;
        for d in &data {
            assert_curve(&fit.conditional_curve(d.t0))?;
        }
        assert_curve(&km_naive(&data).unwrap().curve)?;
    }

    #[test]
    fn conditional_curve_is_valid(data in dataset(20), t0 in 0.5f64..40.0, a_n in 0.05f64..5.0) {
        let fit = GmiFit::new(&data, a_n, k()).unwrap();
        let c = fit.conditional_curve(t0);
        assert_curve(&c)?;
        for r in [0.5, 1.3, 3.0] {
            prop_assert_eq!(c.at(r), conditional_survival_gmi(r, t0, &data, a_n, k()).unwrap());
        }
    }

    #[test]
    fn km_curve_is_valid_and_jumps_at_events(data in dataset(30)) {
        let km = km_naive(&data).unwrap();
        assert_curve(&km.curve)?;
        for t in km.curve.thresholds() {
            prop_assert!(data.iter().any(|d| d.delta1 && d.ratio() == *t));
        }
        prop_assert!(km.variance.iter().all(|v| *v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn permutation_invariant(data in dataset(20), a_n in 0.1f64..3.0, shift in 0usize..19) {
        let mut perm = data.clone();
        perm.rotate_left(shift % data.len());
        perm.reverse();
        for r in [0.4, 1.0, 1.3, 1.7, 3.0] {
            let a = survival_gmi(r, &data, a_n, k()).unwrap();
            let b = survival_gmi(r, &perm, a_n, k()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn common_time_scale_leaves_ratio_outputs_unchanged(data in dataset(20), a_n in 0.1f64..3.0, c in 0.1f64..10.0) {
        let scaled: Vec<SubjectRecord> =
            data.iter().map(|d| SubjectRecord::new(d.t0 * c, d.y1 * c, d.delta1)).collect();
        // Rescaling both times can move a ratio by one ulp, so compare
        // between jumps.
        let curve = survival_gmi_curve(&data, a_n, k()).unwrap();
        let mut probes: Vec<f64> = curve.thresholds().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        probes.push(0.01);
        for r in probes {
            let a = survival_gmi(r, &data, a_n, k()).unwrap();
            let b = survival_gmi(r, &scaled, a_n, k()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn baseline_scale_rescales_ratio_axis(data in dataset(20), a_n in 0.1f64..3.0, c in 0.1f64..10.0) {
        let scaled: Vec<SubjectRecord> =
            data.iter().map(|d| SubjectRecord::new(d.t0 * c, d.y1, d.delta1)).collect();
        let fit = GmiFit::new(&data, a_n, k()).unwrap();
        let fit_c = GmiFit::new(&scaled, a_n, k()).unwrap();
        let base = fit.curve();
        for w in base.thresholds().windows(2) {
            let r = 0.5 * (w[0] + w[1]);
            prop_assert!((fit.at(r) - fit_c.at(r / c)).abs() < 1e-12);
            for (d, dc) in data.iter().zip(&scaled) {
                let a = fit.conditional_curve(d.t0).at(r);
                let b = fit_c.conditional_curve(dc.t0).at(r / c);
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_covariates_is_bitwise_plain(data in dataset(20), a_n in 0.1f64..3.0, r in 0.0f64..4.0) {
        let plain = survival_gmi(r, &data, a_n, k()).unwrap();
        let cov = covariate_survival_gmi(r, &data, a_n, k()).unwrap();
        prop_assert_eq!(plain.to_bits(), cov.estimate.to_bits());
    }

    #[test]
    fn uncensored_wide_bandwidth_is_empirical(mut data in dataset(25), r in 0.0f64..6.0) {
        for d in &mut data {
            d.delta1 = true;
        }
        let n = data.len() as f64;
        let empirical = data.iter().filter(|d| d.ratio() > r).count() as f64 / n;
        let v = survival_gmi(r, &data, 1e6, k()).unwrap();
        prop_assert!((v - empirical).abs() < 1e-10);
        prop_assert!((km_naive(&data).unwrap().at(r) - v).abs() < 1e-10);
    }

    #[test]
    fn kernel_symmetric_and_nonnegative(u in -80.0f64..80.0) {
        prop_assert!(silverman_kernel(u) >= 0.0);
        prop_assert_eq!(silverman_kernel(u), silverman_kernel(-u));
        prop_assert!(silverman_kernel(u) <= silverman_kernel(0.0));
    }

    #[test]
    fn loglog_ci_in_unit_interval(s in 0.0f64..=1.0, se in 0.0f64..2.0, level in 0.5f64..0.999) {
        let ci = loglog_ci(s, se, level);
        prop_assert!(0.0 <= ci.low && ci.low <= s && s <= ci.high && ci.high <= 1.0);
    }

    #[test]
    fn loglog_ci_widens_with_level(s in 0.01f64..0.99, se in 0.001f64..0.5, l1 in 0.5f64..0.99, dl in 0.001f64..0.009) {
        let a = loglog_ci(s, se, l1);
        let b = loglog_ci(s, se, l1 + dl);
        prop_assert!(b.low <= a.low && b.high >= a.high);
    }

    #[test]
    fn wald_p_matches_normal_tail(diff in -1.0f64..1.0, se in 0.001f64..1.0) {
        let w = WaldResult::new(diff, se);
        prop_assert!((0.0..=1.0).contains(&w.p));
        prop_assert!((w.p - two_sided_p(diff / se)).abs() < 1e-15);
    }
}

fn lr(data: &[SubjectRecord]) -> LogRatioData {
    LogRatioData::from_records(data)
}

/// Richardson-extrapolated central difference.
fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let h = 1e-3;
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn aft_gradient_matches_finite_differences(
        data in dataset(25),
        loc in -1.5f64..1.5,
        log_scale in -1.5f64..1.0,
        lognormal in any::<bool>(),
    ) {
        let fam = if lognormal { AftFamily::LogNormal } else { AftFamily::LogLogistic };
        let d = lr(&data);
        let g = censored_gradient(fam, &d, loc, log_scale);
        let fd = [
            central_diff(|m| censored_loglik(fam, &d, m, log_scale), loc),
            central_diff(|s| censored_loglik(fam, &d, loc, s), log_scale),
        ];
        for c in 0..2 {
            let rel = (g[c] - fd[c]).abs() / g[c].abs().max(1.0);
            prop_assert!(rel < 1e-6, "component {c}: {} vs {}", g[c], fd[c]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn aft_optimum_beats_nearby_points(data in dataset(30), lognormal in any::<bool>(), seed in any::<u64>()) {
        use rand::Rng;
        let fam = if lognormal { AftFamily::LogNormal } else { AftFamily::LogLogistic };
        prop_assume!(data.iter().filter(|d| d.delta1).count() >= 2);
        let fit = aft_fit(fam, &data).unwrap();
        prop_assert!(fit.converged);
        let d = lr(&data);
        let best = censored_loglik(fam, &d, fit.location, fit.scale.ln());
        prop_assert!((best - fit.loglik).abs() < 1e-9 * best.abs().max(1.0));
        let mut rng = gmisurv::rng::stream(seed, 0);
        for _ in 0..100 {
            let m = fit.location + rng.random_range(-0.05..0.05);
            let s = fit.scale.ln() + rng.random_range(-0.05..0.05);
            prop_assert!(censored_loglik(fam, &d, m, s) <= best + 1e-10);
        }
    }
}

/// Censored log-likelihood written from the textbook densities.
fn grid_loglik(fam: AftFamily, y: &[f64], e: &[bool], loc: f64, scale: f64) -> f64 {
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let n = Normal::standard();
    y.iter()
        .zip(e)
        .map(|(&y, &e)| {
            let z = (y - loc) / scale;
            match (fam, e) {
                (AftFamily::LogNormal, true) => n.ln_pdf(z) - scale.ln(),
                (AftFamily::LogNormal, false) => n.sf(z).ln(),
                (AftFamily::LogLogistic, true) => z - 2.0 * z.exp().ln_1p() - scale.ln(),
                (AftFamily::LogLogistic, false) => -z.exp().ln_1p(),
            }
        })
        .sum()
}

/// Best log-likelihood on a 400 x 400 grid, refined once around the coarse
/// optimum.
fn grid_search(fam: AftFamily, y: &[f64], e: &[bool]) -> f64 {
    let search = |l0: f64, l1: f64, s0: f64, s1: f64| {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for a in 0..400 {
            let loc = l0 + (l1 - l0) * a as f64 / 399.0;
            for b in 0..400 {
                let ls = s0 + (s1 - s0) * b as f64 / 399.0;
                let v = grid_loglik(fam, y, e, loc, ls.exp());
                if v > best.0 {
                    best = (v, loc, ls);
                }
            }
        }
        best
    };
    let coarse = search(-3.0, 3.0, -3.0, 1.5);
    let (dl, ds) = (6.0 / 399.0, 4.5 / 399.0);
    search(coarse.1 - dl, coarse.1 + dl, coarse.2 - ds, coarse.2 + ds).0
}

#[test]
fn aft_fit_matches_grid_search_oracle() {
    let obs = [
        (0.42, true),
        (0.77, true),
        (0.95, false),
        (1.10, true),
        (1.35, false),
        (1.62, true),
        (2.40, true),
        (3.05, false),
    ];
    let data: Vec<SubjectRecord> = obs.iter().map(|&(q, d)| SubjectRecord::new(4.0, 4.0 * q, d)).collect();
    let y: Vec<f64> = data.iter().map(|d| d.ratio().ln()).collect();
    let e: Vec<bool> = data.iter().map(|d| d.delta1).collect();
    for fam in [AftFamily::LogNormal, AftFamily::LogLogistic] {
        let fit = aft_fit(fam, &data).unwrap();
        let grid = grid_search(fam, &y, &e);
        assert!(
            fit.loglik >= grid - 1e-9,
            "{fam:?}: fit {} below grid {}",
            fit.loglik,
            grid
        );
        assert_eq!(format!("{:.3}", fit.loglik), format!("{:.3}", grid), "{fam:?}");
        assert!((grid_loglik(fam, &y, &e, fit.location, fit.scale) - fit.loglik).abs() < 1e-9);
    }
}

fn as_dataset(records: Vec<SubjectRecord>) -> Dataset {
    Dataset {
        records,
        source: "mem.csv".into(),
        column_map: ColumnMap::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn restrict_followup_idempotent_and_monotone(data in dataset(30), caps in prop::collection::vec(0.5f64..200.0, 2..6)) {
        let ds = as_dataset(data);
        let mut caps = caps;
        caps.sort_by(|a, b| b.total_cmp(a));
        let mut prev = ds.censored();
        for cap in caps {
            let once = restrict_followup(&ds, cap).unwrap();
            prop_assert_eq!(&restrict_followup(&once, cap).unwrap(), &once);
            prop_assert!(once.censored() >= prev);
            prev = once.censored();
            for (a, b) in ds.records.iter().zip(&once.records) {
                prop_assert_eq!(a.t0, b.t0);
                prop_assert_eq!(b.y1, a.y1.min(cap));
                prop_assert_eq!(b.delta1, a.delta1 && a.y1 <= cap);
            }
        }
    }

    #[test]
    fn csv_round_trip(data in dataset(20), zs in prop::collection::vec(-5.0f64..5.0, 20), levels in prop::collection::vec("[a-c]", 20)) {
        let records: Vec<SubjectRecord> = data
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.with_covariates(vec![zs[i]], vec![levels[i].clone()]))
            .collect();
        let ds = as_dataset(records);
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = parse_csv_reader(buf.as_slice(), Path::new("mem.csv"), &ColumnMap::default()).unwrap();
        prop_assert_eq!(back, ds);
    }
}
