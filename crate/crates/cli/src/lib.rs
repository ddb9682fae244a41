//! Command-line front end: configuration loading, the certification sweep,
//! the Table 1 benchmark, validation suites, the spectral oracle and SDPA
//! export.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;
