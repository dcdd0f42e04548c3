//! Command orchestration behind the `twochannel` binary.

pub mod config;
pub mod run;

pub use config::RunConfig;
pub use run::{run, Command, Manifest, Overrides};
