//! Batch experiments over `berkdyn`: configuration, runners and CSV output.

// `!(x > y)` is deliberate: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod escape;
pub mod output;
pub mod run;

pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;
pub use run::{run, Experiment};
