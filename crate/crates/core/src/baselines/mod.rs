//! Comparison estimators that treat the observed ratios as independently
//! censored.

mod aft;
mod km;
mod simplex;

pub use aft::{
    aft_fit, aft_fit_from, aft_survival, censored_gradient, censored_loglik, AftFamily, AftFit, LogRatioData,
};
pub use km::{km_naive, KmCurve};
