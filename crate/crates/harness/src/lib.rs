//! Monte Carlo harness for `qbc-core`: experiment configuration, seeded
//! parallel execution, security classification and result files.

pub mod config;
pub mod output;
pub mod report;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Protocol, Sweep};
pub use output::{emit, read_csv, sig6, write_rows, Format, OutputError, CSV_HEADER};
pub use report::{classify_security, contrast, Security, SecurityReport};
pub use run::{run_experiment, run_tallies, run_tally, trial_rng, ResultRow};
