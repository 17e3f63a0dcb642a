//! Update rules for intermittent-communication optimization.
//!
//! Minibatch SGD, Local SGD and the inner/outer-stepsize family share one round
//! engine so that their reductions to each other hold bit for bit; AC-SA and
//! its multi-stage restart live in [`acsa`].

pub mod acsa;
mod engine;
pub mod schedule;

use serde::{Deserialize, Serialize};

pub use acsa::{multistage_stage_lengths, run_acsa, run_multistage_acsa};
pub use engine::run;
pub use schedule::{CommGeometry, Schedule};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::objective::DistributedObjective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "snake_case")]
pub enum Algorithm {
    Minibatch {
        schedule: Schedule,
    },
    Local {
        schedule: Schedule,
    },
    InnerOuter {
        eta_inner: f64,
        eta_outer: f64,
    },
    Acsa {
        #[serde(default)]
        regularize: bool,
    },
    MultistageAcsa {
        #[serde(rename = "Delta", default, skip_serializing_if = "Option::is_none")]
        initial_gap: Option<f64>,
    },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Minibatch { .. } => "minibatch",
            Algorithm::Local { .. } => "local",
            Algorithm::InnerOuter { .. } => "inner_outer",
            Algorithm::Acsa { .. } => "acsa",
            Algorithm::MultistageAcsa { .. } => "multistage_acsa",
        }
    }

    /// (eta_inner, eta_outer) as reported in result tables; NaN where the
    /// algorithm has no such stepsize.
    pub fn stepsizes(&self) -> (f64, f64) {
        match self {
            Algorithm::Minibatch { schedule } => (0.0, nominal_eta(schedule)),
            Algorithm::Local { schedule } => {
                let e = nominal_eta(schedule);
                (e, e)
            }
            Algorithm::InnerOuter { eta_inner, eta_outer } => (*eta_inner, *eta_outer),
            _ => (f64::NAN, f64::NAN),
        }
    }

    pub fn schedule_name(&self) -> &'static str {
        match self {
            Algorithm::Minibatch { schedule } | Algorithm::Local { schedule } => schedule.name(),
            Algorithm::InnerOuter { .. } => "constant",
            Algorithm::Acsa { .. } | Algorithm::MultistageAcsa { .. } => "acsa",
        }
    }

    /// Same algorithm with its constant stepsize replaced (grid sweeps).
    pub fn with_eta(&self, eta: f64) -> Algorithm {
        match self {
            Algorithm::Minibatch { .. } => Algorithm::Minibatch {
                schedule: Schedule::constant(eta),
            },
            Algorithm::Local { .. } => Algorithm::Local {
                schedule: Schedule::constant(eta),
            },
            Algorithm::InnerOuter { eta_inner, eta_outer } => {
                // keep the inner/outer ratio, scale the outer stepsize to eta
                let ratio = if *eta_outer > 0.0 { eta_inner / eta_outer } else { 0.0 };
                Algorithm::InnerOuter {
                    eta_inner: ratio * eta,
                    eta_outer: eta,
                }
            }
            other => other.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Algorithm::Minibatch { schedule } | Algorithm::Local { schedule } => schedule.validate(),
            Algorithm::InnerOuter { eta_inner, eta_outer } => {
                if *eta_inner >= 0.0 && *eta_outer >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::param("inner and outer stepsizes must be non-negative"))
                }
            }
            Algorithm::Acsa { .. } => Ok(()),
            Algorithm::MultistageAcsa { initial_gap } => match initial_gap {
                Some(d) if !(*d > 0.0) => Err(Error::param("Delta must be positive")),
                _ => Ok(()),
            },
        }
    }
}

fn nominal_eta(s: &Schedule) -> f64 {
    match s {
        Schedule::Constant { eta } => *eta,
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub replicate: u64,
    pub record_iterates: bool,
    pub record_support: bool,
    /// Keep the consensus query point of every local step (memory heavy).
    pub record_steps: bool,
    /// Reject schedules whose stepsize ever exceeds this value.
    pub stepsize_cap: Option<f64>,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            replicate: 0,
            record_iterates: false,
            record_support: false,
            record_steps: false,
            stepsize_cap: None,
            execution: Execution::Sequential,
        }
    }
}

/// Where the reference optimal value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuboptMode {
    /// Closed-form F*.
    Known,
    /// F* from a Newton solve, accurate to its gradient tolerance.
    Newton,
    /// No reference: the series holds raw objective values.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub master_seed: u64,
    pub replicate: u64,
    pub scheme: String,
}

pub const RNG_SCHEME: &str = "splitmix64-counter/box-muller-cos";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub geometry: CommGeometry,
    /// The averaged output point.
    pub final_point: Vec<f64>,
    /// The consensus iterate after the last round.
    pub last_point: Vec<f64>,
    /// F(x_r) - F* for the consensus iterate at the start of rounds 0..=R.
    pub suboptimality_series: Vec<f64>,
    pub final_suboptimality: f64,
    pub reference_value: f64,
    pub subopt_mode: SuboptMode,
    pub iterate_history: Option<Vec<Vec<f64>>>,
    pub step_history: Option<Vec<Vec<f64>>>,
    /// `[round][machine]`: sorted coordinates touched by that machine's queries
    /// during the round. Machines sitting out a round have empty sets.
    pub support_history: Option<Vec<Vec<Vec<usize>>>>,
    pub provenance: RngProvenance,
}

/// A coordinate counts as non-zero above this magnitude.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;

pub fn support_of(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > SUPPORT_THRESHOLD)
        .map(|(i, _)| i)
        .collect()
}

/// (1/W) sum_t w_t x_t with W = sum_t w_t.
pub fn average_iterates(history: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    if history.is_empty() || history.len() != weights.len() {
        return Err(Error::contract("history and weights must be non-empty and equal length"));
    }
    let w_total: f64 = weights.iter().sum();
    if !(w_total > 0.0) {
        return Err(Error::contract("averaging weights sum to zero"));
    }
    let d = history[0].len();
    let mut acc = vec![0.0; d];
    for (x, &w) in history.iter().zip(weights) {
        for (a, v) in acc.iter_mut().zip(x) {
            *a += w * v;
        }
    }
    for a in &mut acc {
        *a /= w_total;
    }
    Ok(acc)
}

pub fn run_minibatch_sgd(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    schedule: Schedule,
    seed: u64,
) -> Result<RunResult> {
    run(obj, &Algorithm::Minibatch { schedule }, geom, seed, &RunOptions::default())
}

pub fn run_local_sgd(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    schedule: Schedule,
    seed: u64,
) -> Result<RunResult> {
    run(obj, &Algorithm::Local { schedule }, geom, seed, &RunOptions::default())
}

pub fn run_inner_outer(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    eta_inner: f64,
    eta_outer: f64,
    seed: u64,
) -> Result<RunResult> {
    run(
        obj,
        &Algorithm::InnerOuter { eta_inner, eta_outer },
        geom,
        seed,
        &RunOptions::default(),
    )
}

/// Runs `algo` with `participants` machines sampled per round.
pub fn run_with_subset(
    obj: &dyn DistributedObjective,
    algo: &Algorithm,
    geom: &CommGeometry,
    participants: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult> {
    if participants == 0 || participants > geom.machines {
        return Err(Error::param(format!(
            "S = {participants} must lie in 1..={}",
            geom.machines
        )));
    }
    run(obj, algo, &geom.with_participants(participants), seed, opts)
}
