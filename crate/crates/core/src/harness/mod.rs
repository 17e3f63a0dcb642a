//! Experiment configuration, sweeps, reports and verification suites.

pub mod config;
pub mod lbcheck;
pub mod report;
pub mod support;
pub mod sweep;

pub use config::{AlgorithmEntry, ExperimentConfig, GeometryGrid, OutputConfig, StepGrid, SCHEMA_VERSION};
pub use report::{emit_report, Report};
pub use support::{check_support_progress, SupportTracker, SupportVerdict};
pub use sweep::{sweep, SweepOutput, SweepRow, CSV_COLUMNS};
