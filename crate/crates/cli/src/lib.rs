//! Library surface of the experiment runner, so integration tests can
//! drive commands in-process and compare outputs byte for byte.

pub mod config;
pub mod runner;

pub use config::{parse_config, LoadedConfig};
pub use runner::{run, CommandKind, RunOptions};
