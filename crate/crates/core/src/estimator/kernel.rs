use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::quadrature::adaptive_simpson;

/// `|½ e^{-|u|/√2} sin(|u|/√2 + π/4)|`, the modified Silverman kernel before
/// normalisation.
#[inline]
pub fn silverman_unnormalized(u: f64) -> f64 {
    let x = u.abs() / SQRT_2;
    (0.5 * (-x).exp() * (x + FRAC_PI_4).sin()).abs()
}

/// The modified Silverman kernel, normalised to integrate to one.
///
/// The normalisation constant is computed once per process and cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    normalization: f64,
}

const INTEGRATION_LIMIT: f64 = 60.0;

impl Kernel {
    pub fn silverman() -> Kernel {
        static CACHE: OnceLock<Kernel> = OnceLock::new();
        *CACHE.get_or_init(|| Kernel {
            normalization: silverman_normalization(),
        })
    }

    pub fn normalization_constant(&self) -> f64 {
        self.normalization
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        silverman_unnormalized(u) / self.normalization
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::silverman()
    }
}

pub fn silverman_kernel(u: f64) -> f64 {
    Kernel::silverman().eval(u)
}

// Integrates over [0, 60] piecewise between the zeros of the sine factor,
// where the integrand is smooth, and doubles by symmetry. The tail beyond
// |u| = 60 is below e^{-60/√2} < 1e-18.
fn silverman_normalization() -> f64 {
    let mut knots = vec![0.0];
    let mut m = 1.0;
    loop {
        let zero = SQRT_2 * (m * PI - FRAC_PI_4);
        if zero >= INTEGRATION_LIMIT {
            break;
        }
        knots.push(zero);
        m += 1.0;
    }
    knots.push(INTEGRATION_LIMIT);
    let tol = 1e-10 / knots.len() as f64;
    let half: f64 = knots
        .windows(2)
        .map(|w| adaptive_simpson(&silverman_unnormalized, w[0], w[1], tol))
        .sum();
    2.0 * half
}
