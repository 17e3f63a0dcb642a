//! Verification suites for the two lower-bound constructions.

use serde::{Deserialize, Serialize};

use super::support::{check_support_progress, SupportVerdict};
use crate::error::Result;
use crate::instances::chain::restricted_minimum;
use crate::instances::{
    build_chain, build_local_lb, chain_residual_lower_bound, closed_form_x4_trajectory, ChainParams, LocalLbParams,
    Scale,
};
use crate::objective::{average_gradient, DistributedObjective};
use crate::optimizers::{run, Algorithm, CommGeometry, RunOptions, Schedule};
use crate::rates::local_lb_construction_floor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: &str, name: &str, passed: bool, detail: String) -> Check {
    Check {
        suite: suite.into(),
        name: name.into(),
        passed,
        detail,
    }
}

pub fn lb_params(zeta: f64) -> LocalLbParams {
    LocalLbParams {
        machines: 2,
        smoothness: 16.0,
        strong_convexity: 1.0,
        mu: 1.0,
        curvature: 8.0,
        zeta,
        sigma: 0.0,
        scale: Scale::Gap(1.0),
    }
}

/// Closed-form fourth-coordinate recursion and the fixed-stepsize floor.
pub fn local_lb_suite(seed: u64) -> Result<Vec<Check>> {
    let p = lb_params(1.0);
    let inst = build_local_lb(p.clone())?;
    let l = p.curvature;
    let mut worst: f64 = 0.0;
    for (i, &(frac, k, r)) in [(1.0, 1, 5), (0.5, 3, 7), (0.1, 10, 4), (0.02, 5, 12), (0.7, 2, 9)]
        .iter()
        .enumerate()
    {
        let eta = frac / l;
        let opts = RunOptions {
            record_iterates: true,
            replicate: i as u64,
            ..RunOptions::default()
        };
        let res = run(
            &inst,
            &Algorithm::Local {
                schedule: Schedule::constant(eta),
            },
            &CommGeometry::new(2, k, r),
            seed,
            &opts,
        )?;
        let hist = res.iterate_history.expect("iterates recorded");
        let cf = closed_form_x4_trajectory(l, p.mu, p.zeta, eta, k, r)?;
        for rr in 0..r {
            worst = worst.max((hist[rr + 1][3] - cf[rr]).abs());
        }
    }
    let mut out = vec![check(
        "local_lb",
        "x4 recursion",
        worst <= 1e-12,
        format!("max deviation {worst:e}"),
    )];

    let (k, r) = (10, 20);
    let floor = local_lb_construction_floor(p.smoothness, p.mu, inst.offset(), p.zeta, r as f64);
    let mut min_gap = f64::INFINITY;
    for i in 0..10 {
        let eta = (1.0 / l) * (1e-3f64).powf(i as f64 / 9.0);
        let res = run(
            &inst,
            &Algorithm::Local {
                schedule: Schedule::constant(eta),
            },
            &CommGeometry::new(2, k, r),
            seed,
            &RunOptions::default(),
        )?;
        min_gap = min_gap.min(res.final_suboptimality);
    }
    out.push(check(
        "local_lb",
        "fixed-stepsize floor",
        min_gap >= floor,
        format!("best {min_gap:e} vs floor {floor:e}"),
    ));
    Ok(out)
}

/// q by bisection on 1 - 3q + q^2 over [0, 1].
pub fn chain_q_reference() -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - 3.0 * mid + mid * mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn chain_algorithms(h: f64) -> Vec<Algorithm> {
    vec![
        Algorithm::Minibatch {
            schedule: Schedule::constant(1.0 / h),
        },
        Algorithm::Local {
            schedule: Schedule::constant(0.5 / h),
        },
        Algorithm::InnerOuter {
            eta_inner: 0.2 / h,
            eta_outer: 0.5 / h,
        },
        Algorithm::Acsa { regularize: false },
        Algorithm::MultistageAcsa { initial_gap: None },
    ]
}

/// Chain algebra, span progress of every optimizer, and the residual floor.
pub fn chain_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (h, lam, c) = (9.0, 1.0, 1.0);
    let rounds = 6;
    let inst = build_chain(ChainParams {
        machines: 2,
        smoothness: h,
        strong_convexity: lam,
        scale: c,
        rounds,
    })?;
    let qref = chain_q_reference();
    out.push(check(
        "chain",
        "q root",
        (inst.q() - qref).abs() <= 1e-9,
        format!("q = {} vs {qref}", inst.q()),
    ));
    let xs = inst.minimizer().expect("closed-form minimizer").to_vec();
    let gn = average_gradient(&inst, &xs)?.iter().map(|v| v * v).sum::<f64>().sqrt();
    out.push(check("chain", "stationarity", gn < 1e-8, format!("|grad F(x*)| = {gn:e}")));
    let fs = inst.value(&xs);
    let want = -qref * c * c * (h - lam) / 16.0;
    out.push(check(
        "chain",
        "optimal value",
        ((fs - want) / want).abs() <= 1e-10,
        format!("F* = {fs} vs {want}"),
    ));

    for (i, m) in [2usize, 3].into_iter().enumerate() {
        let inst = build_chain(ChainParams {
            machines: m,
            smoothness: h,
            strong_convexity: lam,
            scale: c,
            rounds,
        })?;
        let bound = chain_residual_lower_bound(&inst, rounds);
        for algo in chain_algorithms(h) {
            let opts = RunOptions {
                record_support: true,
                replicate: i as u64,
                ..RunOptions::default()
            };
            let res = run(&inst, &algo, &CommGeometry::new(m, 3, rounds), seed, &opts)?;
            let v = check_support_progress(&res)?;
            out.push(check(
                "chain",
                &format!("support progress {} M={m}", algo.name()),
                v == SupportVerdict::Pass,
                format!("{v:?}"),
            ));
            out.push(check(
                "chain",
                &format!("residual floor {} M={m}", algo.name()),
                res.final_suboptimality >= bound,
                format!("{:e} vs floor {bound:e}", res.final_suboptimality),
            ));
        }
        let fstar = inst.optimal_value().expect("closed-form optimum");
        let d = inst.dim();
        let mut ok = true;
        let mut worst = f64::INFINITY;
        for k in 0..=d {
            let (_, v) = restricted_minimum(&inst, k);
            let gap = v - fstar;
            let b = chain_residual_lower_bound(&inst, k);
            worst = worst.min(gap - b);
            ok &= gap >= b * (1.0 - 1e-9) - 1e-14;
        }
        out.push(check(
            "chain",
            &format!("restricted minimum M={m} d={d}"),
            ok,
            format!("min slack {worst:e}"),
        ));
    }
    Ok(out)
}

pub fn all_suites(seed: u64) -> Result<Vec<Check>> {
    let mut v = local_lb_suite(seed)?;
    v.extend(chain_suite(seed)?);
    Ok(v)
}
