//! Command-line harness: seeded synthetic experiments, the verification
//! suite and their CSV/JSON artifacts.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod suite;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, HarnessResult};
