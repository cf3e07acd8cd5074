//! Library side of the `dioph` binary: the expression grammar, the chain
//! file format, experiment configs, report rendering and the commands.

pub mod app;
pub mod config;
pub mod expr;
pub mod record;
pub mod render;

pub use app::{exit, run, Cli, CliError, Outcome};
