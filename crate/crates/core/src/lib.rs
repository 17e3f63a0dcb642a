//! Deterministic simulation of intermittent-communication SGD on
//! heterogeneous distributed objectives, with rate-bound evaluators and the
//! hard instances used to probe them.

pub mod error;
pub mod exec;
pub mod harness;
pub mod instances;
pub mod logreg;
pub mod objective;
pub mod optimizers;
pub mod rates;
pub mod rng;

pub use error::{Error, Result};
pub use exec::Execution;
pub use instances::InstanceSpec;
pub use objective::{DistributedObjective, ProblemConstants};
pub use optimizers::{run, Algorithm, CommGeometry, RunOptions, RunResult, Schedule};
