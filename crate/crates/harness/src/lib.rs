//! Experiment harness: builds atoms, dictionaries and cone grids from a JSON
//! configuration, runs the verification suites and writes reports.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod stats;
pub mod suites;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::Experiment;
pub use report::{emit_report, ReportFormat, VerificationReport};
pub use suites::Suite;
