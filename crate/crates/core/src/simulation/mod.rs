//! Monte Carlo study of the estimators under a Weibull–gamma frailty model
//! for paired progression times.

mod calibrate;
mod grid;
mod model;
mod scenario;
mod truth;

pub use calibrate::{
    calibrate_alpha, calibrate_tau, censoring_rate, frailty_correlation, AlphaCalibration, CalibrationConfig,
    TauCalibration,
};
pub use grid::{run_grid, write_grid_csv, GridConfig, GridRow};
pub use model::{censor_pairs, sample_pairs, simulate_dataset, FrailtyModel, PairSampler};
pub use scenario::{run_scenario, CellResult, ScenarioResult, SimScenario};
pub use truth::{true_survival, true_survival_many, TRUTH_DRAWS, TRUTH_SEED};
