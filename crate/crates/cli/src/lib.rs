//! Config ingestion and subcommands for the `fractube` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;

pub use config::{parse_config, parse_config_str, write_config, Job, JobConfig};
pub use error::CliError;
