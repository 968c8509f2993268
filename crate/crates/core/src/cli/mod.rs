//! Configuration, experiment sweeps and CSV emission behind the `wpan-cts` binary.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{RunConfig, KEYS};
pub use output::{read_summary, write_summary, SummaryRecord};
pub use sweep::{run_sweep, SweepOutcome, SweepSpec};
