//! Batch experiment front end: strict JSON configuration, orchestration of
//! the library operations, and CSV/dump emission for external plotting.

pub mod config;
pub mod experiments;

pub use config::{parse_config, ExperimentKind, RunConfig};
pub use experiments::{run, ExitStatus};
