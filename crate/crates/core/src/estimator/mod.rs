//! Kernel conditional product-limit estimation of the GMI survival function.

mod bandwidth;
mod covariate;
mod gmi;
mod influence;
mod kernel;

pub use bandwidth::{default_bandwidth, BandwidthRule};
pub use covariate::{covariate_survival_gmi, CovariateEstimate, StratumWarning};
pub use gmi::{conditional_survival_gmi, survival_gmi, survival_gmi_curve, GmiFit};
pub use influence::{influence_values, plugin_variance, InfluenceVector};
pub use kernel::{silverman_kernel, silverman_unnormalized, Kernel};
