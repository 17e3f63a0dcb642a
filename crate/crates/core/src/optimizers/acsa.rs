//! Accelerated stochastic approximation (AC-SA) and its multi-stage restart.
//!
//! One AC-SA iteration is one communication round: the gradient at the
//! middle point x_md is the K-sample, S-machine minibatch average.

use super::engine::{check_geometry, participants, provenance, reference};
use super::{Algorithm, CommGeometry, RunOptions, RunResult};
use crate::error::{Error, Result};
use crate::objective::DistributedObjective;
use crate::rng::{RngStream, StreamKey};

struct State {
    x: Vec<f64>,
    ag: Vec<f64>,
}

struct Recorder {
    series: Vec<f64>,
    iterates: Option<Vec<Vec<f64>>>,
    support: Option<Vec<Vec<Vec<usize>>>>,
}

/// Minibatch gradient of F + reg/2 |x - anchor|^2 at `point`, from the
/// participants of `round`. Machine samples use keys (replicate, m, round, k).
fn round_gradient(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    point: &[f64],
    anchor: &[f64],
    reg: f64,
    seed: u64,
    opts: &RunOptions,
    round: usize,
    rec: &mut Recorder,
) -> Vec<f64> {
    let d = point.len();
    let active = participants(geom, seed, opts.replicate, round);
    let k = geom.local_steps;
    let mut acc = vec![0.0; d];
    let mut g = vec![0.0; d];
    for &m in &active {
        for step in 0..k {
            let mut rng = RngStream::new(seed, StreamKey::new(opts.replicate, m as u64, round as u64, step as u64));
            obj.stochastic_gradient(m, point, &mut rng, &mut g);
            for j in 0..d {
                acc[j] += g[j];
            }
        }
    }
    let n = (active.len() * k) as f64;
    for j in 0..d {
        acc[j] = acc[j] / n + reg * (point[j] - anchor[j]);
    }
    if let Some(h) = rec.support.as_mut() {
        let supp = super::support_of(point);
        let mut per_machine = vec![Vec::new(); geom.machines];
        for &m in &active {
            per_machine[m] = supp.clone();
        }
        h.push(per_machine);
    }
    acc
}

/// One AC-SA step with parameters (alpha, gamma) and strong convexity `lam`.
/// The argmin in the x-update is solved in closed form.
#[allow(clippy::too_many_arguments)]
fn acsa_step(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    st: &mut State,
    alpha: f64,
    gamma: f64,
    lam: f64,
    anchor: &[f64],
    reg: f64,
    seed: u64,
    opts: &RunOptions,
    round: usize,
    rec: &mut Recorder,
) {
    let d = st.x.len();
    let denom = gamma + (1.0 - alpha * alpha) * lam;
    let c_ag = (1.0 - alpha) * (lam + gamma) / denom;
    let c_x = alpha * ((1.0 - alpha) * lam + gamma) / denom;
    let md: Vec<f64> = (0..d).map(|j| c_ag * st.ag[j] + c_x * st.x[j]).collect();
    let g = round_gradient(obj, geom, &md, anchor, reg, seed, opts, round, rec);
    // argmin_x alpha (<g, x> + lam/2 |md - x|^2) + ((1-alpha) lam + gamma)/2 |x_prev - x|^2
    let keep = (1.0 - alpha) * lam + gamma;
    let total = alpha * lam + keep;
    for j in 0..d {
        st.x[j] = (alpha * lam * md[j] + keep * st.x[j] - alpha * g[j]) / total;
        st.ag[j] = alpha * st.x[j] + (1.0 - alpha) * st.ag[j];
    }
}

fn finish(
    obj: &dyn DistributedObjective,
    algo: Algorithm,
    geom: &CommGeometry,
    st: State,
    rec: Recorder,
    fstar: f64,
    mode: super::SuboptMode,
    seed: u64,
    opts: &RunOptions,
) -> RunResult {
    let final_suboptimality = obj.value(&st.ag) - fstar;
    RunResult {
        algorithm: algo,
        geometry: *geom,
        final_point: st.ag.clone(),
        last_point: st.ag,
        suboptimality_series: rec.series,
        final_suboptimality,
        reference_value: fstar,
        subopt_mode: mode,
        iterate_history: rec.iterates,
        step_history: None,
        support_history: rec.support,
        provenance: provenance(seed, opts.replicate),
    }
}

fn recorder(obj: &dyn DistributedObjective, x0: &[f64], fstar: f64, opts: &RunOptions) -> Recorder {
    Recorder {
        series: vec![obj.value(x0) - fstar],
        iterates: opts.record_iterates.then(|| vec![x0.to_vec()]),
        support: opts.record_support.then(Vec::new),
    }
}

fn record(obj: &dyn DistributedObjective, rec: &mut Recorder, ag: &[f64], fstar: f64) {
    rec.series.push(obj.value(ag) - fstar);
    if let Some(h) = rec.iterates.as_mut() {
        h.push(ag.to_vec());
    }
}

/// Single-stage AC-SA for R rounds with alpha_t = 2/(t+1),
/// gamma_t = 4 H/(t(t+1)). With `regularize`, runs on
/// F + reg/2 |x - x0|^2 where reg = sigma / (B sqrt(M K R)).
pub fn run_acsa(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    regularize: bool,
    seed: u64,
) -> Result<RunResult> {
    run_acsa_with(obj, geom, regularize, seed, &RunOptions::default())
}

pub(super) fn run_acsa_with(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    regularize: bool,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult> {
    check_geometry(obj, geom)?;
    let c = obj.constants();
    let lam = c.strong_convexity;
    if lam <= 0.0 && !regularize {
        return Err(Error::param(
            "AC-SA needs lambda > 0 unless the regularized variant is requested",
        ));
    }
    let reg = if regularize {
        let b = c.radius.ok_or(Error::MissingParameter("B"))?;
        let mkr = (geom.participants() * geom.local_steps * geom.rounds) as f64;
        c.sigma / (b * mkr.sqrt())
    } else {
        0.0
    };
    let h_eff = c.smoothness + reg;
    let lam_eff = lam + reg;
    let d = obj.dim();
    let (fstar, mode) = reference(obj);
    let anchor = vec![0.0; d];
    let mut st = State {
        x: vec![0.0; d],
        ag: vec![0.0; d],
    };
    let mut rec = recorder(obj, &st.ag, fstar, opts);
    for r in 0..geom.rounds {
        let t = (r + 1) as f64;
        let alpha = 2.0 / (t + 1.0);
        let gamma = 4.0 * h_eff / (t * (t + 1.0));
        acsa_step(obj, geom, &mut st, alpha, gamma, lam_eff, &anchor, reg, seed, opts, r, &mut rec);
        record(obj, &mut rec, &st.ag, fstar);
    }
    Ok(finish(
        obj,
        Algorithm::Acsa { regularize },
        geom,
        st,
        rec,
        fstar,
        mode,
        seed,
        opts,
    ))
}

/// Stage lengths N_k and curvature parameters phi_k of the multi-stage
/// restart, for stages that fit in `rounds` (the last one truncated).
/// `noise_var` is the variance of the round gradient estimator.
pub fn multistage_stage_lengths(
    smoothness: f64,
    lam: f64,
    noise_var: f64,
    initial_gap: f64,
    rounds: usize,
) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut used = 0usize;
    let mut k = 1i32;
    while used < rounds {
        let target = initial_gap * 2f64.powi(-(k + 1));
        let n = (4.0 * (2.0 * smoothness / lam).sqrt())
            .max(128.0 * noise_var / (3.0 * lam * target))
            .ceil() as usize;
        let n = n.max(1);
        let nf = n as f64;
        let phi = (2.0 * smoothness).max(
            (lam * noise_var / (3.0 * initial_gap * 2f64.powi(-(k - 1)) * nf * (nf + 1.0) * (nf + 2.0)))
                .sqrt(),
        );
        let take = n.min(rounds - used);
        out.push((take, phi));
        used += take;
        k += 1;
    }
    out
}

/// Multi-stage AC-SA: stages of N_k rounds, each warm-started from the
/// previous stage's aggregate point. The last stage is cut so that exactly R
/// rounds are used.
pub fn run_multistage_acsa(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    initial_gap: Option<f64>,
    seed: u64,
) -> Result<RunResult> {
    run_multistage_with(obj, geom, initial_gap, seed, &RunOptions::default())
}

pub(super) fn run_multistage_with(
    obj: &dyn DistributedObjective,
    geom: &CommGeometry,
    initial_gap: Option<f64>,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult> {
    check_geometry(obj, geom)?;
    let c = obj.constants();
    let lam = c.strong_convexity;
    if !(lam > 0.0) {
        return Err(Error::param("multi-stage AC-SA needs lambda > 0"));
    }
    let delta = initial_gap
        .or(c.initial_gap)
        .ok_or(Error::MissingParameter("Delta"))?;
    if !(delta > 0.0) {
        return Err(Error::param("Delta must be positive"));
    }
    let noise_var = c.sigma * c.sigma / (geom.participants() * geom.local_steps) as f64;
    let stages = multistage_stage_lengths(c.smoothness, lam, noise_var, delta, geom.rounds);
    let d = obj.dim();
    let (fstar, mode) = reference(obj);
    let mut st = State {
        x: vec![0.0; d],
        ag: vec![0.0; d],
    };
    let mut rec = recorder(obj, &st.ag, fstar, opts);
    let mut round = 0;
    for (n, phi) in stages {
        st.x = st.ag.clone();
        let anchor = st.ag.clone();
        for t in 1..=n {
            let t = t as f64;
            let alpha = 2.0 / (t + 1.0);
            let gamma = 4.0 * phi / (t * (t + 1.0));
            acsa_step(obj, geom, &mut st, alpha, gamma, lam, &anchor, 0.0, seed, opts, round, &mut rec);
            record(obj, &mut rec, &st.ag, fstar);
            round += 1;
        }
    }
    Ok(finish(
        obj,
        Algorithm::MultistageAcsa { initial_gap },
        geom,
        st,
        rec,
        fstar,
        mode,
        seed,
        opts,
    ))
}
