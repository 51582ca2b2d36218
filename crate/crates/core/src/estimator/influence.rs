use serde::Serialize;

use crate::data::SubjectRecord;
use crate::error::Result;

use super::gmi::{GmiFit, GroupSums};
use super::kernel::Kernel;

/// Estimated influence values `ξ̂_i(r)` of the averaged estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceVector {
    pub r: f64,
    pub xi: Vec<f64>,
}

impl InfluenceVector {
    /// `n⁻² Σ ξ̂_i²`.
    pub fn variance(&self) -> f64 {
        let n = self.xi.len() as f64;
        self.xi.iter().map(|x| x * x).sum::<f64>() / (n * n)
    }
}

/// Plug-in influence values at `r`.
///
/// For subject `i` the conditional hazard increments `h_k`, the weighted
/// at-risk fraction `Ĥ(s_k; t0_i)` and the conditional curve are all taken at
/// `t0_i` with the same kernel weights. The influence of the product-limit
/// curve is linearised jump by jump:
///
/// `ξ̂_i = Ŝ(r; t0_i) - Σ_{s_k ≤ r} Π_{l≠k}(1 - h_l) (dN_i(s_k) - A_i(s_k) h_k) / Ĥ(s_k; t0_i) - Ŝ_G(r)`
///
/// which is the discrete counterpart of the continuous formula and is finite
/// even where the conditional curve reaches zero. Subject `i` always carries
/// positive weight in its own risk sets, so `Ĥ > 0` wherever its terms are
/// non-zero.
pub fn influence_values(r: f64, data: &[SubjectRecord], a_n: f64, kernel: Kernel) -> Result<InfluenceVector> {
    let fit = GmiFit::new(data, a_n, kernel)?;
    Ok(fit.influence(r))
}

pub fn plugin_variance(r: f64, data: &[SubjectRecord], a_n: f64, kernel: Kernel) -> Result<f64> {
    Ok(influence_values(r, data, a_n, kernel)?.variance())
}

impl GmiFit {
    pub fn influence(&self, r: f64) -> InfluenceVector {
        let n = self.len();
        let g_r = self.index.groups_upto(r);
        let mut w = Vec::with_capacity(n);
        let mut sums = GroupSums::default();
        let mut factors = Vec::with_capacity(g_r);
        let mut tail = vec![1.0; g_r + 1];
        let mut cond = Vec::with_capacity(n);
        let mut lin = Vec::with_capacity(n);

        for i in 0..n {
            self.fill_weights(self.log_t0[i], &mut w);
            sums.fill(&self.index, &w);
            factors.clear();
            factors.extend((0..g_r).map(|g| sums.factor(g)));
            for g in (0..g_r).rev() {
                tail[g] = tail[g + 1] * factors[g];
            }
            let s_i = factors.iter().fold(1.0, |s, f| s * f);

            let own = self.index.group_of[i];
            let own_event = self.delta[i];
            let total = sums.at_risk[0];
            let mut head = 1.0;
            let mut acc = 0.0;
            // A_i(s_k) = 0 past the subject's own ratio.
            for g in 0..g_r.min(own + 1) {
                let at_risk = sums.at_risk[g];
                let d = sums.events[g];
                if at_risk > 0.0 && d > 0.0 {
                    let h = d / at_risk;
                    let big_h = at_risk / total;
                    let dn = if g == own && own_event { 1.0 } else { 0.0 };
                    acc += head * tail[g + 1] * (dn - h) / big_h;
                }
                head *= factors[g];
            }
            cond.push(s_i);
            lin.push(-acc);
        }

        let s_g = cond.iter().sum::<f64>() / n as f64;
        let xi = cond.iter().zip(&lin).map(|(s, l)| s + l - s_g).collect();
        InfluenceVector { r, xi }
    }
}
