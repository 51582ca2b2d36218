use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::data::SubjectRecord;
use crate::error::{GmiError, Result};

/// Paired progression times sharing a gamma frailty `θ ~ Gamma(α, rate α)`:
/// given `θ`, `T0 ~ Weibull(e^μ θ, 1/σ)` and `T1 ~ Weibull(e^μ θ R, 1/σ)`
/// independently, where `Weibull(λ, k)` has survival `exp{-(t/λ)^k}`.
///
/// `alpha = ∞` removes the frailty (`θ ≡ 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrailtyModel {
    pub mu: f64,
    pub sigma: f64,
    /// Ratio of conditional medians of `T1` to `T0`.
    pub ratio: f64,
    pub alpha: f64,
}

impl FrailtyModel {
    pub const DEFAULT_MU: f64 = 3.0;

    pub fn new(mu: f64, sigma: f64, ratio: f64, alpha: f64) -> Result<Self> {
        let m = Self {
            mu,
            sigma,
            ratio,
            alpha,
        };
        m.check()?;
        Ok(m)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    fn check(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(GmiError::InvalidParameter(format!("{what} must be positive, got {v}")));
        if !self.mu.is_finite() {
            return Err(GmiError::InvalidParameter(format!(
                "mu must be finite, got {}",
                self.mu
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad("sigma", self.sigma);
        }
        if !(self.ratio.is_finite() && self.ratio > 0.0) {
            return bad("ratio", self.ratio);
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return bad("alpha", self.alpha);
        }
        Ok(())
    }

    pub fn sampler(&self) -> PairSampler {
        PairSampler {
            scale: self.mu.exp(),
            sigma: self.sigma,
            ratio: self.ratio,
            frailty: self
                .alpha
                .is_finite()
                .then(|| Gamma::new(self.alpha, 1.0 / self.alpha).expect("alpha checked positive")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PairSampler {
    scale: f64,
    sigma: f64,
    ratio: f64,
    frailty: Option<Gamma<f64>>,
}

impl PairSampler {
    /// One `(t0, t1)` pair. The two exponential variates are drawn before the
    /// frailty so that, for a fixed stream, they do not depend on `α`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let e0: f64 = Exp1.sample(rng);
        let e1: f64 = Exp1.sample(rng);
        let theta = self.frailty.map_or(1.0, |g| g.sample(rng));
        let lambda = self.scale * theta;
        (lambda * e0.powf(self.sigma), lambda * self.ratio * e1.powf(self.sigma))
    }
}

pub fn sample_pairs<R: Rng + ?Sized>(model: &FrailtyModel, n: usize, rng: &mut R) -> Vec<(f64, f64)> {
    let s = model.sampler();
    (0..n).map(|_| s.sample(rng)).collect()
}

/// Applies `C1 ~ Uniform(0.85 τ, τ)` censoring to the second time.
pub fn censor_pairs<R: Rng + ?Sized>(pairs: &[(f64, f64)], tau: f64, rng: &mut R) -> Vec<SubjectRecord> {
    pairs
        .iter()
        .map(|&(t0, t1)| {
            let c1 = tau * (0.85 + 0.15 * rng.random::<f64>());
            SubjectRecord::new(t0, t1.min(c1), t1 <= c1)
        })
        .collect()
}

pub fn simulate_dataset<R: Rng + ?Sized>(model: &FrailtyModel, tau: f64, n: usize, rng: &mut R) -> Vec<SubjectRecord> {
    let pairs = sample_pairs(model, n, rng);
    censor_pairs(&pairs, tau, rng)
}
