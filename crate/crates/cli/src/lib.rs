//! Library surface of the `sf2d` command-line tool: file formats, report
//! assembly, rendering and the subcommand implementations.

pub mod commands;
pub mod formats;
pub mod render;
pub mod report;

pub use commands::{cmd_analyze, cmd_render, cmd_synth, AnalyzeArgs, CliError};
