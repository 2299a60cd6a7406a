//! Command-line front end for `riclink`: sweep configuration, CSV output and
//! the subcommands behind the `riclink` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{constellation_csv, render_sweep, sweep_rows, theory_rows, write_csv};
pub use config::{ConfigFile, SweepConfig};
pub use error::CliError;
pub use output::{Row, Source, SCHEMA_LINE};
