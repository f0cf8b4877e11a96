//! Scenario runner for the billiard laboratory: strict TOML scenarios in, hashed CSV, JSON
//! and SVG artifacts out.

pub mod acceptance;
pub mod artifacts;
pub mod config;
pub mod error;
pub mod figure;
pub mod run;
pub mod scenarios;

pub use config::Scenario;
pub use error::CliError;
pub use run::{execute, run_to_dir, Outcome, RunReport, Summary};
