//! Experiment harness: seeded trials, sweeps, fits, theorem checks and the CLI.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod fit;
pub mod lemmas;
pub mod theorem;

pub use config::{ExperimentConfig, NoiseSetting, SweepAxis};
pub use experiment::{
    estimate_steady_state, rmse, run_trials, sweep, sweep_lambda_s, QRatioSweep, SweepParam, SweepPoint, TrialResult, TrialSet,
};
pub use fit::{fit_steady_state, SteadyStateFit};
