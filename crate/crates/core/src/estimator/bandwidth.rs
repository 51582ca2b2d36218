use serde::{Deserialize, Serialize};

use crate::data::SubjectRecord;
use crate::error::{GmiError, Result};

/// Bandwidth `σ̂₀ · n^(-exponent)`, where `σ̂₀` is the sample standard
/// deviation of `log t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRule {
    pub exponent: f64,
}

impl BandwidthRule {
    pub const TWO_FIFTHS: BandwidthRule = BandwidthRule { exponent: 0.4 };
    pub const ONE_THIRD: BandwidthRule = BandwidthRule { exponent: 1.0 / 3.0 };
    pub const ONE_HALF: BandwidthRule = BandwidthRule { exponent: 0.5 };

    pub fn new(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(GmiError::InvalidParameter(format!(
                "bandwidth exponent must be positive, got {exponent}"
            )));
        }
        Ok(Self { exponent })
    }
}

impl Default for BandwidthRule {
    fn default() -> Self {
        Self::TWO_FIFTHS
    }
}

pub fn default_bandwidth(data: &[SubjectRecord], rule: BandwidthRule) -> Result<f64> {
    let n = data.len();
    if n < 2 {
        return Err(GmiError::TooFewSubjects { needed: 2, got: n });
    }
    let logs: Vec<f64> = data.iter().map(|r| r.t0.ln()).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    let ss: f64 = logs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(GmiError::DegenerateBandwidth);
    }
    Ok(sd * (n as f64).powf(-rule.exponent))
}
