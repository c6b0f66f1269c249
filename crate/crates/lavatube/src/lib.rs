//! Configuration, file formats, SVG frames and subcommands for the lavatube
//! exploration simulator. The simulation itself lives in `lavatube-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod render;

pub use commands::{CliError, Overrides};
pub use config::{parse_config, render_config, Config, ConfigError};
