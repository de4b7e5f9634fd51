//! Experiment runners, records and output for `lab-cli`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod record;
pub mod stats;
pub mod svg;

pub use config::{ExperimentConfig, Format, Params, Subcommand};
pub use error::CliError;
pub use experiments::{report_summary, run_experiment};
pub use record::ExperimentRecord;
