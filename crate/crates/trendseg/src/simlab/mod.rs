// SPDX-License-Identifier: MIT OR Apache-2.0

//! Test signals, noise, scoring and the Monte-Carlo loop.

mod harness;
mod metrics;
mod noise;
mod signals;

pub use harness::{
    bin_of, run_once, run_replicates, run_simulation, splitmix, summarize, RunOutcome, SimulationConfig,
    SimulationReport, BIN_LABELS,
};
pub use metrics::{hausdorff, mse};
pub use noise::{generate_noise, NoiseKind, NoiseSpec, DEFAULT_PHI};
pub use signals::{generate_signal, Anomaly, Family, Piece, Signal, SignalSpec};
