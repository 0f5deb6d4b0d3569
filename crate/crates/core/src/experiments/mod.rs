//! Monte Carlo engine: per-slot trials that tie harvesting, allocation,
//! sensing and recovery together, and the parameter sweeps built on them.
//!
//! Every random draw in a trial is seeded from
//! `(base seed, grid index, trial index, stream)`, so results are identical
//! for any number of worker threads.

mod config;
mod seed;
mod sweep;
mod trial;

pub use config::{
    EnergySetup, ExperimentConfig, Forced, Scheme, SignalSource, DEFAULT_REAL_TRIALS, DEFAULT_SYNTHETIC_TRIALS,
    FRAME_MAX_ITERATIONS,
};
pub use seed::{derive_seed, Stream};
pub use sweep::{
    bounds_curve, linear_grid, run_point, summarize, sweep_k_real, sweep_mu_over_tau, sweep_num_sensors,
    sweep_panel_area, BoundsCurve, BoundsRow, Metric, SchemeSummary, SweepAxis, SweepPoint, SweepResult,
};
pub use trial::{run_trial, SchemeOutcome, TrialOutcome};
