use serde::{Deserialize, Serialize};

use crate::error::{GmiError, Result};

/// One subject's paired observation.
///
/// `t0` is the fully observed time to progression on the prior line,
/// `y1 = min(T1, C1)` the follow-up on the current line and `delta1` whether
/// progression was observed. `z` holds continuous covariates and `v`
/// categorical codes; both are empty when unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub t0: f64,
    pub y1: f64,
    pub delta1: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub v: Vec<String>,
}

impl SubjectRecord {
    pub fn new(t0: f64, y1: f64, delta1: bool) -> Self {
        Self {
            t0,
            y1,
            delta1,
            z: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn with_covariates(mut self, z: Vec<f64>, v: Vec<String>) -> Self {
        self.z = z;
        self.v = v;
        self
    }

    /// Observed (possibly censored) ratio `y1 / t0`.
    #[inline]
    pub fn ratio(&self) -> f64 {
        self.y1 / self.t0
    }

    fn check(&self, index: usize) -> Result<()> {
        let bad = |reason: &str| GmiError::InvalidRecord {
            index,
            reason: reason.to_string(),
        };
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(bad("t0 must be positive and finite"));
        }
        if !(self.y1.is_finite() && self.y1 > 0.0) {
            return Err(bad("y1 must be positive and finite"));
        }
        if self.z.iter().any(|z| !z.is_finite()) {
            return Err(bad("continuous covariates must be finite"));
        }
        Ok(())
    }
}

/// Checks record invariants: positive finite times and a common covariate
/// arity across the dataset.
pub fn validate(records: &[SubjectRecord]) -> Result<()> {
    let Some(first) = records.first() else {
        return Ok(());
    };
    let (q, p) = (first.z.len(), first.v.len());
    for (index, rec) in records.iter().enumerate() {
        rec.check(index)?;
        if rec.z.len() != q || rec.v.len() != p {
            return Err(GmiError::InconsistentArity {
                index,
                expected: format!("{q} continuous / {p} categorical"),
                found: format!("{} continuous / {} categorical", rec.z.len(), rec.v.len()),
            });
        }
    }
    Ok(())
}

pub fn censoring_fraction(records: &[SubjectRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| !r.delta1).count() as f64 / records.len() as f64
}
