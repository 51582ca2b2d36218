//! Nonparametric estimation of the survival function of the growth
//! modulation index (GMI): the within-patient ratio `T1 / T0` of successive
//! times to progression, where `T1` is right censored and the ratio is
//! therefore dependently censored through the shared `T0`.
//!
//! The crate is organised as
//!
//! - [`estimator`]: the modified Silverman kernel, bandwidth rule, the kernel
//!   conditional product-limit estimator, its average over subjects, the
//!   covariate-stratified extension and the influence-function variance.
//! - [`uncertainty`]: subject-level bootstrap, log-log confidence intervals
//!   and paired Wald tests.
//! - [`baselines`]: naive Kaplan–Meier on censored ratios and lognormal /
//!   loglogistic censored maximum likelihood fits.
//! - [`simulation`]: Weibull–gamma frailty generator, calibration of the
//!   frailty shape and censoring horizon, and the Monte Carlo scenario runner.
//! - [`io`] and [`report`]: CSV ingestion, follow-up restriction and the
//!   machine-readable outputs used by the `gmi` binary.
//!
//! With the default `parallel` feature, bootstrap resamples, simulation
//! replicates and Monte Carlo draws are spread over a rayon pool. Every
//! parallel map is order preserving and reductions run sequentially over the
//! collected results, so outputs are identical for any thread count and with
//! the feature disabled.

pub mod baselines;
pub mod cli;
pub mod curve;
pub mod data;
pub mod error;
pub mod estimator;
pub mod io;
pub mod methods;
mod par;
mod quadrature;
pub mod report;
pub mod rng;
pub mod simulation;
pub mod uncertainty;

pub use curve::SurvivalCurve;
pub use data::SubjectRecord;
pub use error::{GmiError, Result};
