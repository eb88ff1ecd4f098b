//! Monte Carlo simulation of academic peer review.
//!
//! Compares a journal-mediated review system with a platform-mediated one in
//! which an independent platform scores manuscripts before authors apply to
//! journals, plus a quartile-free variant used to study how journal quality
//! stratifies over time.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod figdata;
pub mod metrics;
pub mod model;
pub mod output;
pub mod review;
pub mod stochastic;
pub mod sweep;
pub mod systems;

pub use config::{SimConfig, SystemKind};
pub use error::{Error, Result};
pub use systems::{run_simulation, IssueLedger, RunOutput, Simulation};
