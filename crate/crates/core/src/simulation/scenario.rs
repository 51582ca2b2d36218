use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::baselines::km_naive;
use crate::data::{censoring_fraction, SubjectRecord};
use crate::error::{GmiError, Result};
use crate::estimator::BandwidthRule;
use crate::methods::{Bandwidth, Method, Panel};
use crate::par;
use crate::rng::{derive_seed, StreamRng};
use crate::uncertainty::{column_sds, BootstrapConfig, GmiEstimate};

use super::model::{simulate_dataset, FrailtyModel};
use super::truth::{true_survival_many, TRUTH_DRAWS, TRUTH_SEED};

/// One cell of the simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub model: FrailtyModel,
    pub tau: f64,
    pub n: usize,
    pub replicates: usize,
    pub thresholds: Vec<f64>,
    pub bootstrap_b: usize,
    pub seed: u64,
    pub bandwidth: BandwidthRule,
    pub rebandwidth: bool,
    pub level: f64,
    pub truth_draws: usize,
}

impl SimScenario {
    pub const DEFAULT_REPLICATES: usize = 500;
    pub const DEFAULT_BOOTSTRAP: usize = 300;

    pub fn new(model: FrailtyModel, tau: f64, n: usize, thresholds: &[f64]) -> Self {
        Self {
            model,
            tau,
            n,
            replicates: Self::DEFAULT_REPLICATES,
            thresholds: thresholds.to_vec(),
            bootstrap_b: Self::DEFAULT_BOOTSTRAP,
            seed: 1,
            bandwidth: BandwidthRule::default(),
            rebandwidth: true,
            level: 0.95,
            truth_draws: TRUTH_DRAWS,
        }
    }

    fn check(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(GmiError::InvalidParameter(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.n < 2 {
            return Err(GmiError::TooFewSubjects { needed: 2, got: self.n });
        }
        if self.replicates == 0 || self.bootstrap_b < 2 {
            return Err(GmiError::InvalidParameter(
                "need replicates >= 1 and bootstrap_b >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// Operating characteristics of one method at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResult {
    pub method: Method,
    pub r: f64,
    pub truth: f64,
    pub mean_estimate: f64,
    pub bias: f64,
    /// Standard deviation of the estimates across replicates.
    pub se: f64,
    /// Mean of the estimated standard errors.
    pub see: f64,
    /// Fraction of confidence intervals covering the truth.
    pub cp: f64,
    pub used: usize,
    pub failures: usize,
    /// False when fewer than two replicates were usable and `se` is set to 0.
    pub se_defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub replicates: usize,
    pub truth: Vec<f64>,
    pub achieved_censoring: f64,
    pub cells: Vec<CellResult>,
}

impl ScenarioResult {
    pub fn cell(&self, method: Method, r: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.method == method && c.r == r)
    }
}

struct Replicate {
    censoring: f64,
    /// Per method (in `Method::ALL` order): estimates with SEs, or `None` on failure.
    methods: Vec<Option<Vec<(f64, f64)>>>,
}

const BOOTSTRAPPED: [Method; 3] = [Method::Proposed, Method::LogNormal, Method::LogLogistic];

fn run_replicate(s: &SimScenario, rep: usize) -> Replicate {
    let rep_seed = derive_seed(s.seed, rep as u64);
    let mut rng = StreamRng::seed_from_u64(rep_seed);
    let data = simulate_dataset(&s.model, s.tau, s.n, &mut rng);
    let panel = Panel::new(&BOOTSTRAPPED, &s.thresholds, Bandwidth::Rule(s.bandwidth));
    let cfg = BootstrapConfig {
        resamples: s.bootstrap_b,
        seed: derive_seed(rep_seed, 0xB007),
        rebandwidth: s.rebandwidth,
    };
    let boot_se = panel.bootstrap(&data, &cfg).map(|rows| column_sds(&rows)).ok();

    let methods = Method::ALL
        .iter()
        .map(|&m| match m {
            Method::Km => km_estimates(&data, &s.thresholds),
            _ => {
                let est = panel.estimate(m, &data).ok()?;
                let se = boot_se.as_ref()?;
                est.iter()
                    .enumerate()
                    .map(|(k, &e)| se[panel.column(m, k).unwrap()].map(|v| (e, v)))
                    .collect()
            }
        })
        .collect();
    Replicate {
        censoring: censoring_fraction(&data),
        methods,
    }
}

fn km_estimates(data: &[SubjectRecord], thresholds: &[f64]) -> Option<Vec<(f64, f64)>> {
    let km = km_naive(data).ok()?;
    Some(thresholds.iter().map(|&r| (km.at(r), km.se_at(r))).collect())
}

/// Runs every replicate of the scenario and aggregates bias, empirical SE,
/// mean estimated SE and log-log interval coverage per method and threshold.
///
/// Replicate `i` draws from a stream keyed by `(seed, i)` and results are
/// reduced in replicate order, so the output does not depend on the thread
/// count. A method failing in more than 1% of replicates is an error;
/// otherwise failed replicates are excluded from that method's cells.
pub fn run_scenario(s: &SimScenario) -> Result<ScenarioResult> {
    s.check()?;
    let truth = true_survival_many(&s.model, &s.thresholds, s.truth_draws, TRUTH_SEED);
    let reps = par::map_indexed(s.replicates, |i| run_replicate(s, i));

    let mut cells = Vec::new();
    for (mi, &m) in Method::ALL.iter().enumerate() {
        let ok: Vec<&Vec<(f64, f64)>> = reps.iter().filter_map(|r| r.methods[mi].as_ref()).collect();
        let failures = s.replicates - ok.len();
        if failures as f64 > 0.01 * s.replicates as f64 {
            return Err(GmiError::ReplicateFailures {
                method: m.to_string(),
                failed: failures,
                replicates: s.replicates,
            });
        }
        for (k, &r) in s.thresholds.iter().enumerate() {
            let used = ok.len();
            let est: Vec<f64> = ok.iter().map(|v| v[k].0).collect();
            let mean = est.iter().sum::<f64>() / used as f64;
            let se_defined = used >= 2;
            let sd = if se_defined {
                (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (used - 1) as f64).sqrt()
            } else {
                0.0
            };
            let see = ok.iter().map(|v| v[k].1).sum::<f64>() / used as f64;
            let covered = ok
                .iter()
                .filter(|v| GmiEstimate::new(m, r, v[k].0, v[k].1, s.level).covers(truth[k]))
                .count();
            cells.push(CellResult {
                method: m,
                r,
                truth: truth[k],
                mean_estimate: mean,
                bias: mean - truth[k],
                se: sd,
                see,
                cp: covered as f64 / used as f64,
                used,
                failures,
                se_defined,
            });
        }
    }
    let achieved_censoring = reps.iter().map(|r| r.censoring).sum::<f64>() / s.replicates as f64;
    Ok(ScenarioResult {
        replicates: s.replicates,
        truth,
        achieved_censoring,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimScenario {
        let model = FrailtyModel::new(3.0, 0.5, 1.0, 2.66).unwrap();
        let mut s = SimScenario::new(model, 40.0, 30, &[1.0, 1.3]);
        s.replicates = 4;
        s.bootstrap_b = 20;
        s.truth_draws = 200_000;
        s
    }

    #[test]
    fn single_replicate_has_undefined_se() {
        let mut s = small();
        s.replicates = 1;
        let res = run_scenario(&s).unwrap();
        for c in &res.cells {
            assert!(!c.se_defined);
            assert_eq!(c.se, 0.0);
            assert_eq!(c.bias, c.mean_estimate - c.truth);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let s = small();
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 8);
        assert!(a
            .cells
            .iter()
            .all(|c| (0.0..=1.0).contains(&c.cp) && c.se >= 0.0 && c.see >= 0.0));
    }

    #[test]
    fn rejects_invalid_scenarios() {
        let mut s = small();
        s.n = 1;
        assert!(run_scenario(&s).is_err());
        let mut s = small();
        s.tau = 0.0;
        assert!(run_scenario(&s).is_err());
    }
}
