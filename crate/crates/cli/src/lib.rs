//! Scenario runner, file output and ingestion behind the `tempwave` binary.

pub mod files;
pub mod scenario;

use std::fmt;

pub use files::{ingest_counts, read_complex_table};
pub use scenario::{run_scenario, Scenario, SCENARIOS};

/// Raised for bad command-line or configuration input outside the library
/// (for example an unknown scenario name).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 2 for configuration problems, 3 for data and I/O problems.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<tempwave::Error>() {
            return if e.is_config() { 2 } else { 3 };
        }
    }
    3
}

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
