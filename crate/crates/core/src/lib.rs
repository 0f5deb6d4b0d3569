//! Distributed compressive sensing for energy-harvesting sensor networks.
//!
//! The crate bundles everything needed to study how per-sensor (CS) and
//! joint (DCS) sparse recovery behave when the number of measurements each
//! sensor can afford is dictated by a random harvested-energy budget:
//!
//! - [`model`]: common-plus-innovation sparse ensembles, the DCT basis and
//!   ingestion of mote sensor logs.
//! - [`sensing`]: projection operators and the extended joint system.
//! - [`solver`]: equality-constrained ℓ1 recovery (ADMM), an exhaustive ℓ0
//!   oracle and error metrics.
//! - [`energy`]: uniform harvest model, battery budget and the measurement
//!   allocation policy.
//! - [`bounds`]: closed-form lower bounds on the failure probability for raw,
//!   CS and DCS gathering, plus a Monte Carlo cross-check.
//! - [`experiments`]: deterministic Monte Carlo sweeps over energy level,
//!   network size and panel area.

pub mod bounds;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod model;
pub mod report;
pub mod sensing;
pub mod solver;

pub use error::{Error, Result};
