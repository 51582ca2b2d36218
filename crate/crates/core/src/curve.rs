use serde::{Deserialize, Serialize};

/// Right-continuous, nonincreasing step function on ratio thresholds.
///
/// The curve equals 1 on `[0, thresholds[0])` and `values[k]` on
/// `[thresholds[k], thresholds[k + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    thresholds: Vec<f64>,
    values: Vec<f64>,
}

impl SurvivalCurve {
    /// Builds a curve from jump locations and post-jump values. Thresholds
    /// must be strictly increasing and the two slices of equal length.
    pub fn new(thresholds: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(thresholds.len(), values.len(), "threshold/value length mismatch");
        debug_assert!(thresholds.windows(2).all(|w| w[0] < w[1]));
        Self { thresholds, values }
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// Index of the last jump at or below `r`, if any.
    pub fn jump_index(&self, r: f64) -> Option<usize> {
        let k = self.thresholds.partition_point(|&s| s <= r);
        k.checked_sub(1)
    }

    pub fn at(&self, r: f64) -> f64 {
        self.jump_index(r).map_or(1.0, |k| self.values[k])
    }

    pub fn at_many(&self, rs: &[f64]) -> Vec<f64> {
        rs.iter().map(|&r| self.at(r)).collect()
    }

    /// Nonincreasing, within `[0, 1]`, strictly increasing jumps.
    pub fn is_valid(&self) -> bool {
        self.values.iter().all(|v| (0.0..=1.0).contains(v))
            && self.values.windows(2).all(|w| w[1] <= w[0])
            && self.thresholds.windows(2).all(|w| w[0] < w[1])
    }
}
