//! Shared round loop for Minibatch SGD, Local SGD and inner/outer updates.
//!
//! Per round, every participating machine starts from the consensus point and
//! runs K steps. Step k queries a stochastic gradient g at the local point y,
//! accumulates `outer * g` into the machine's round direction, and moves
//! `y -= inner * g`. The consensus point then moves by the mean round
//! direction. Minibatch SGD is inner = 0, outer = eta/K; Local SGD is
//! inner = outer = eta.

use std::collections::BTreeSet;

use super::{
    acsa, Algorithm, CommGeometry, RngProvenance, RunOptions, RunResult, Schedule, SuboptMode,
    RNG_SCHEME, SUPPORT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::objective::DistributedObjective;
use crate::rng::{RngStream, StreamKey, SAMPLER_MACHINE};

#[derive(Clone, Copy)]
struct Step {
    inner: f64,
    outer: f64,
    weight: f64,
}

enum Plan<'a> {
    Minibatch(&'a Schedule),
    Local(&'a Schedule),
    InnerOuter(f64, f64),
}

impl Plan<'_> {
    fn round_steps(&self, r: usize, geom: &CommGeometry) -> Vec<Step> {
        let k = geom.local_steps;
        match self {
            Plan::Minibatch(s) => {
                let (eta, w) = s.at(r, geom.rounds, geom);
                let outer = eta / k as f64;
                vec![
                    Step {
                        inner: 0.0,
                        outer,
                        weight: w,
                    };
                    k
                ]
            }
            Plan::Local(s) => (0..k)
                .map(|j| {
                    let (eta, w) = s.at(r * k + j, geom.total_steps(), geom);
                    Step {
                        inner: eta,
                        outer: eta,
                        weight: w,
                    }
                })
                .collect(),
            Plan::InnerOuter(i, o) => vec![
                Step {
                    inner: *i,
                    outer: *o,
                    weight: 1.0,
                };
                k
            ],
        }
    }

    /// Largest stepsize the plan will take over the run.
    fn peak(&self, geom: &CommGeometry) -> f64 {
        let mut peak: f64 = 0.0;
        for r in 0..geom.rounds {
            for s in self.round_steps(r, geom) {
                let nominal = match self {
                    Plan::Minibatch(_) => s.outer * geom.local_steps as f64,
                    _ => s.inner.max(s.outer),
                };
                peak = peak.max(nominal);
            }
        }
        peak
    }
}

struct MachineRound {
    direction: Vec<f64>,
    weighted_queries: Vec<f64>,
    support: Vec<usize>,
    queries: Option<Vec<Vec<f64>>>,
}

pub(super) fn reference(obj: &dyn DistributedObjective) -> (f64, SuboptMode) {
    match obj.optimal_value() {
        Some(v) => (
            v,
            if obj.family() == "logistic" {
                SuboptMode::Newton
            } else {
                SuboptMode::Known
            },
        ),
        None => (0.0, SuboptMode::Raw),
    }
}

pub(super) fn participants(geom: &CommGeometry, seed: u64, replicate: u64, round: usize) -> Vec<usize> {
    let s = geom.participants();
    if s == geom.machines {
        (0..geom.machines).collect()
    } else {
        let mut rng = RngStream::new(seed, StreamKey::new(replicate, SAMPLER_MACHINE, round as u64, 0));
        rng.sample_without_replacement(geom.machines, s)
    }
}

pub(super) fn check_geometry(obj: &dyn DistributedObjective, geom: &CommGeometry) -> Result<()> {
    geom.validate()?;
    if geom.machines != obj.machines() {
        return Err(Error::contract(format!(
            "geometry has M = {}, objective has {} machines",
            geom.machines,
            obj.machines()
        )));
    }
    Ok(())
}

pub(super) fn provenance(seed: u64, replicate: u64) -> RngProvenance {
    RngProvenance {
        master_seed: seed,
        replicate,
        scheme: RNG_SCHEME.to_string(),
    }
}

/// Work (machines x steps x dim) below which a round is simulated sequentially.
const PARALLEL_ROUND_WORK: usize = 1 << 14;

/// Runs any algorithm on `obj`. Results depend only on (obj, algo, geom,
/// seed, replicate); the execution mode affects speed only.
pub fn run(
    obj: &dyn DistributedObjective,
    algo: &Algorithm,
    geom: &CommGeometry,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult> {
    algo.validate()?;
    check_geometry(obj, geom)?;
    let plan = match algo {
        Algorithm::Minibatch { schedule } => Plan::Minibatch(schedule),
        Algorithm::Local { schedule } => Plan::Local(schedule),
        Algorithm::InnerOuter { eta_inner, eta_outer } => Plan::InnerOuter(*eta_inner, *eta_outer),
        Algorithm::Acsa { regularize } => return acsa::run_acsa_with(obj, geom, *regularize, seed, opts),
        Algorithm::MultistageAcsa { initial_gap } => {
            return acsa::run_multistage_with(obj, geom, *initial_gap, seed, opts)
        }
    };
    if let Some(cap) = opts.stepsize_cap {
        let peak = plan.peak(geom);
        if peak > cap * (1.0 + 1e-12) {
            return Err(Error::param(format!("stepsize {peak} exceeds the cap {cap}")));
        }
    }

    let d = obj.dim();
    let k = geom.local_steps;
    let (fstar, mode) = reference(obj);
    let mut x = vec![0.0; d];
    let mut avg_acc = vec![0.0; d];
    let mut w_total = 0.0;
    let mut series = Vec::with_capacity(geom.rounds + 1);
    series.push(obj.value(&x) - fstar);
    let mut iterates = opts.record_iterates.then(|| vec![x.clone()]);
    let mut steps_hist = opts.record_steps.then(Vec::new);
    let mut support_hist = opts.record_support.then(Vec::new);

    for r in 0..geom.rounds {
        let steps = plan.round_steps(r, geom);
        let active = participants(geom, seed, opts.replicate, r);
        let exec = if active.len() * k * d >= PARALLEL_ROUND_WORK {
            opts.execution
        } else {
            Execution::Sequential
        };
        let xr = &x;
        let outs = exec.map(&active, |&m| {
            machine_round(obj, m, xr, &steps, seed, opts, r as u64)
        });

        let s = active.len() as f64;
        let mut direction = vec![0.0; d];
        let mut queried = vec![0.0; d];
        for o in &outs {
            for j in 0..d {
                direction[j] += o.direction[j];
                queried[j] += o.weighted_queries[j];
            }
        }
        for j in 0..d {
            x[j] -= direction[j] / s;
            avg_acc[j] += queried[j] / s;
        }
        w_total += steps.iter().map(|st| st.weight).sum::<f64>();

        if let Some(h) = steps_hist.as_mut() {
            for step in 0..k {
                let mut mean = vec![0.0; d];
                for o in &outs {
                    let q = &o.queries.as_ref().expect("queries recorded")[step];
                    for j in 0..d {
                        mean[j] += q[j];
                    }
                }
                mean.iter_mut().for_each(|v| *v /= s);
                h.push(mean);
            }
        }
        if let Some(h) = support_hist.as_mut() {
            let mut per_machine = vec![Vec::new(); geom.machines];
            for (o, &m) in outs.into_iter().zip(&active) {
                per_machine[m] = o.support;
            }
            h.push(per_machine);
        }
        series.push(obj.value(&x) - fstar);
        if let Some(h) = iterates.as_mut() {
            h.push(x.clone());
        }
    }

    if !(w_total > 0.0) {
        return Err(Error::contract("averaging weights sum to zero"));
    }
    let final_point: Vec<f64> = avg_acc.iter().map(|v| v / w_total).collect();
    let final_suboptimality = obj.value(&final_point) - fstar;
    Ok(RunResult {
        algorithm: algo.clone(),
        geometry: *geom,
        final_point,
        last_point: x,
        suboptimality_series: series,
        final_suboptimality,
        reference_value: fstar,
        subopt_mode: mode,
        iterate_history: iterates,
        step_history: steps_hist,
        support_history: support_hist,
        provenance: super::engine::provenance(seed, opts.replicate),
    })
}

fn machine_round(
    obj: &dyn DistributedObjective,
    m: usize,
    start: &[f64],
    steps: &[Step],
    seed: u64,
    opts: &RunOptions,
    round: u64,
) -> MachineRound {
    let d = start.len();
    let mut y = start.to_vec();
    let mut g = vec![0.0; d];
    let mut direction = vec![0.0; d];
    let mut weighted = vec![0.0; d];
    let mut support = BTreeSet::new();
    let mut queries = opts.record_steps.then(|| Vec::with_capacity(steps.len()));
    for (k, st) in steps.iter().enumerate() {
        if opts.record_support {
            for (j, v) in y.iter().enumerate() {
                if v.abs() > SUPPORT_THRESHOLD {
                    support.insert(j);
                }
            }
        }
        if let Some(q) = queries.as_mut() {
            q.push(y.clone());
        }
        for j in 0..d {
            weighted[j] += st.weight * y[j];
        }
        let mut rng = RngStream::new(seed, StreamKey::new(opts.replicate, m as u64, round, k as u64));
        obj.stochastic_gradient(m, &y, &mut rng, &mut g);
        for j in 0..d {
            direction[j] += st.outer * g[j];
            y[j] -= st.inner * g[j];
        }
    }
    MachineRound {
        direction,
        weighted_queries: weighted,
        support: support.into_iter().collect(),
        queries,
    }
}
