//! Library half of the `nehari-fp` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{load_config, parse_config, RunConfig};
pub use run::{run, Command};
