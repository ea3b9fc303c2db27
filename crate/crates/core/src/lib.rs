//! Online recovery of time-varying sparse signals from streaming compressed
//! measurements.
//!
//! * [`measurement`]: dictionaries, noise and restricted isometry constants.
//! * [`signal`]: synthetic sparse targets with drifting support.
//! * [`solver`]: streaming ISTA and its LCA reading.
//! * [`theory`]: closed-form tracking bounds and their hypotheses.
//! * [`harness`]: seeded experiments, curve fitting and the CLI.

pub mod error;
pub mod harness;
pub mod measurement;
pub mod rng;
pub mod signal;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use measurement::{MeasurementMatrix, NoiseMode, RipEstimate, RipMethod};
pub use signal::{DynamicTarget, GenConfig};
pub use solver::{SolverConfig, SolverState, SolverTrace};
pub use theory::{IstaBoundParams, LcaBoundParams, PreconditionReport};
