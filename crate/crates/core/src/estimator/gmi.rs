use crate::curve::SurvivalCurve;
use crate::data::{self, SubjectRecord};
use crate::error::{GmiError, Result};

use super::bandwidth::{default_bandwidth, BandwidthRule};
use super::kernel::Kernel;

/// Run of subjects sharing one observed ratio (exact binary equality).
#[derive(Debug, Clone)]
pub(crate) struct RatioGroup {
    pub ratio: f64,
    pub start: usize,
    pub end: usize,
    pub has_event: bool,
}

/// Subjects sorted by observed ratio, with ties grouped.
#[derive(Debug, Clone)]
pub(crate) struct RatioIndex {
    /// Sorted position -> original record index.
    pub order: Vec<usize>,
    pub event: Vec<bool>,
    pub groups: Vec<RatioGroup>,
    /// Original record index -> group index.
    pub group_of: Vec<usize>,
}

impl RatioIndex {
    pub fn new(data: &[SubjectRecord]) -> Self {
        let ratios: Vec<f64> = data.iter().map(SubjectRecord::ratio).collect();
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.sort_by(|&a, &b| ratios[a].total_cmp(&ratios[b]).then(a.cmp(&b)));
        let event: Vec<bool> = order.iter().map(|&i| data[i].delta1).collect();

        let mut groups: Vec<RatioGroup> = Vec::new();
        let mut group_of = vec![0; data.len()];
        for (pos, &i) in order.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if g.ratio == ratios[i] => {
                    g.end = pos + 1;
                    g.has_event |= event[pos];
                }
                _ => groups.push(RatioGroup {
                    ratio: ratios[i],
                    start: pos,
                    end: pos + 1,
                    has_event: event[pos],
                }),
            }
            group_of[i] = groups.len() - 1;
        }
        Self {
            order,
            event,
            groups,
            group_of,
        }
    }

    /// Number of groups with ratio at or below `r`.
    pub fn groups_upto(&self, r: f64) -> usize {
        self.groups.partition_point(|g| g.ratio <= r)
    }
}

/// Per-group weighted event mass and weighted at-risk mass for one
/// conditioning point.
#[derive(Debug, Default, Clone)]
pub(crate) struct GroupSums {
    pub events: Vec<f64>,
    pub at_risk: Vec<f64>,
}

impl GroupSums {
    /// `weights` is indexed by sorted position.
    pub fn fill(&mut self, index: &RatioIndex, weights: &[f64]) {
        let g_n = index.groups.len();
        self.events.clear();
        self.events.resize(g_n, 0.0);
        self.at_risk.clear();
        self.at_risk.resize(g_n + 1, 0.0);
        for (g, grp) in index.groups.iter().enumerate() {
            let mut d = 0.0;
            let mut total = 0.0;
            let span = grp.start..grp.end;
            for (&w, &event) in weights[span.clone()].iter().zip(&index.event[span]) {
                total += w;
                if event {
                    d += w;
                }
            }
            self.events[g] = d;
            self.at_risk[g] = total;
        }
        // Suffix sums from the end, so an empty risk set is exactly zero.
        for g in (0..g_n).rev() {
            self.at_risk[g] += self.at_risk[g + 1];
        }
    }

    /// Product-limit factor of group `g`; 1 when nobody carries weight at risk.
    #[inline]
    pub fn factor(&self, g: usize) -> f64 {
        let r = self.at_risk[g];
        if r > 0.0 {
            1.0 - self.events[g] / r
        } else {
            1.0
        }
    }
}

/// Prepared kernel conditional product-limit estimator for one dataset and
/// bandwidth.
#[derive(Debug, Clone)]
pub struct GmiFit {
    pub(crate) index: RatioIndex,
    pub(crate) log_t0: Vec<f64>,
    pub(crate) delta: Vec<bool>,
    pub(crate) bandwidth: f64,
    pub(crate) kernel: Kernel,
}

impl GmiFit {
    pub fn new(data: &[SubjectRecord], bandwidth: f64, kernel: Kernel) -> Result<Self> {
        if data.is_empty() {
            return Err(GmiError::TooFewSubjects { needed: 1, got: 0 });
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(GmiError::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        data::validate(data)?;
        Ok(Self {
            index: RatioIndex::new(data),
            log_t0: data.iter().map(|r| r.t0.ln()).collect(),
            delta: data.iter().map(|r| r.delta1).collect(),
            bandwidth,
            kernel,
        })
    }

    /// Fits with the bandwidth given by `rule` on this data.
    pub fn with_rule(data: &[SubjectRecord], rule: BandwidthRule, kernel: Kernel) -> Result<Self> {
        let a_n = default_bandwidth(data, rule)?;
        Self::new(data, a_n, kernel)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.log_t0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_t0.is_empty()
    }

    #[inline]
    pub(crate) fn fill_weights(&self, log_t0: f64, weights: &mut Vec<f64>) {
        weights.clear();
        weights.extend(
            self.index
                .order
                .iter()
                .map(|&j| self.kernel.eval((self.log_t0[j] - log_t0) / self.bandwidth)),
        );
    }

    /// Conditional curve given `T0 = t0`.
    pub fn conditional_curve(&self, t0: f64) -> SurvivalCurve {
        let mut w = Vec::with_capacity(self.len());
        self.fill_weights(t0.ln(), &mut w);
        let mut sums = GroupSums::default();
        sums.fill(&self.index, &w);
        let mut thresholds = Vec::new();
        let mut values = Vec::new();
        let mut s = 1.0;
        for (g, grp) in self.index.groups.iter().enumerate() {
            if !grp.has_event {
                continue;
            }
            s *= sums.factor(g);
            thresholds.push(grp.ratio);
            values.push(s);
        }
        SurvivalCurve::new(thresholds, values)
    }

    /// Average of the conditional curves at every subject's own `t0`.
    pub fn curve(&self) -> SurvivalCurve {
        self.averaged_curve(|i, w| self.fill_weights(self.log_t0[i], w))
    }

    /// Shared averaging loop. `fill(i, buf)` writes the sorted-position
    /// weights used for conditioning point `i`.
    pub(crate) fn averaged_curve<F>(&self, mut fill: F) -> SurvivalCurve
    where
        F: FnMut(usize, &mut Vec<f64>),
    {
        let n = self.len();
        let g_n = self.index.groups.len();
        let mut acc = vec![0.0; g_n];
        let mut w = Vec::with_capacity(n);
        let mut sums = GroupSums::default();
        for i in 0..n {
            fill(i, &mut w);
            sums.fill(&self.index, &w);
            let mut s = 1.0;
            for (g, a) in acc.iter_mut().enumerate() {
                s *= sums.factor(g);
                *a += s;
            }
        }
        let mut thresholds = Vec::new();
        let mut values = Vec::new();
        for (g, grp) in self.index.groups.iter().enumerate() {
            if grp.has_event {
                thresholds.push(grp.ratio);
                values.push((acc[g] / n as f64).clamp(0.0, 1.0));
            }
        }
        SurvivalCurve::new(thresholds, values)
    }

    pub fn at(&self, r: f64) -> f64 {
        self.curve().at(r)
    }
}

/// Kernel conditional product-limit estimate of `P(T1/T0 > r | T0 = t0)`.
pub fn conditional_survival_gmi(r: f64, t0: f64, data: &[SubjectRecord], a_n: f64, kernel: Kernel) -> Result<f64> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(GmiError::InvalidParameter(format!("t0 must be positive, got {t0}")));
    }
    Ok(GmiFit::new(data, a_n, kernel)?.conditional_curve(t0).at(r))
}

/// Estimate of `S_G(r) = P(T1/T0 > r)`: the conditional estimator averaged
/// over the observed `t0` values.
pub fn survival_gmi(r: f64, data: &[SubjectRecord], a_n: f64, kernel: Kernel) -> Result<f64> {
    Ok(survival_gmi_curve(data, a_n, kernel)?.at(r))
}

pub fn survival_gmi_curve(data: &[SubjectRecord], a_n: f64, kernel: Kernel) -> Result<SurvivalCurve> {
    Ok(GmiFit::new(data, a_n, kernel)?.curve())
}
