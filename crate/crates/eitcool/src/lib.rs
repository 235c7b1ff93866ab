//! Scenario files, experiment runners and CSV output on top of `eitcool-core`.

pub mod assemble;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod quantity;
pub mod runner;

pub use eitcool_core;
pub use error::RunError;
