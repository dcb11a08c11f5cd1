//! Command-line front end for the `stickslip` engine: built-in scenarios,
//! JSON scenario files, CSV/JSON export, stability reports and sweeps.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;
