//! Empirical results set against bound values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::{Algorithm, RunResult, Schedule};
use crate::rates::{
    eval_all, local_convex_explicit, mbsgd_convex_explicit, mbsgd_sc_explicit, BoundParams, Regime,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algo: String,
    pub schedule: String,
    pub eta_inner: f64,
    pub eta_outer: f64,
    pub replicate: u64,
    pub final_subopt: f64,
    /// explicit-constant guarantee for this algorithm and schedule, if one
    /// applies
    pub explicit_bound: Option<f64>,
    pub compliant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub regime: Regime,
    pub params: BoundParams,
    pub bounds: Vec<BoundValue>,
    pub rows: Vec<ReportRow>,
    pub verdicts: Vec<String>,
}

fn explicit_bound(algo: &Algorithm, regime: Regime, p: &BoundParams) -> Option<f64> {
    let (m, k, r) = (p.machines?, p.local_steps?, p.rounds?);
    match (algo, regime) {
        (Algorithm::Minibatch { .. }, Regime::Convex) => {
            Some(mbsgd_convex_explicit(p.smoothness?, p.radius?, p.sigma_star?, m, k, r))
        }
        (Algorithm::Minibatch { schedule: Schedule::Stich { .. } }, Regime::StronglyConvex) => {
            let b = p.radius?;
            Some(mbsgd_sc_explicit(p.smoothness?, p.strong_convexity?, b * b, p.sigma_star?, m, k, r))
        }
        (Algorithm::Local { schedule: Schedule::Theorem2Convex { .. } }, Regime::Convex) => Some(local_convex_explicit(
            p.smoothness?,
            p.radius?,
            p.sigma?,
            p.sigma_star?,
            p.zeta_bar?,
            m,
            k,
            r,
        )),
        _ => None,
    }
}

/// Builds the comparison report. Every result's geometry must agree with the
/// M, K, R (and S) given in `params`.
pub fn emit_report(results: &[RunResult], params: &BoundParams, regime: Regime) -> Result<Report> {
    for res in results {
        let g = &res.geometry;
        let checks = [
            ("M", params.machines, g.machines),
            ("K", params.local_steps, g.local_steps),
            ("R", params.rounds, g.rounds),
            ("S", params.participants, g.participants()),
        ];
        for (label, want, got) in checks {
            if let Some(w) = want {
                if w != got as f64 {
                    return Err(Error::Config(format!(
                        "parameter mismatch: bounds use {label} = {w}, a result has {label} = {got}"
                    )));
                }
            }
        }
    }
    let sc = regime == Regime::StronglyConvex;
    let bounds = eval_all(params)
        .into_iter()
        .filter(|(n, _)| n.strongly_convex() == sc)
        .map(|(n, v)| BoundValue {
            name: n.as_str().to_string(),
            value: v,
        })
        .collect();
    let rows: Vec<ReportRow> = results
        .iter()
        .map(|res| {
            let (ei, eo) = res.algorithm.stepsizes();
            let eb = explicit_bound(&res.algorithm, regime, params);
            ReportRow {
                algo: res.algorithm.name().to_string(),
                schedule: res.algorithm.schedule_name().to_string(),
                eta_inner: ei,
                eta_outer: eo,
                replicate: res.provenance.replicate,
                final_subopt: res.final_suboptimality,
                explicit_bound: eb,
                compliant: eb.map(|b| res.final_suboptimality <= b),
            }
        })
        .collect();

    let best = |name: &str| {
        rows.iter()
            .filter(|r| r.algo == name)
            .map(|r| r.final_subopt)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    };
    let mut verdicts = Vec::new();
    if let (Some(l), Some(m)) = (best("local"), best("minibatch")) {
        let zs = params.zeta_star.map_or("unknown".to_string(), |z| format!("{}", z * z));
        let rel = if l >= m { ">=" } else { "<" };
        verdicts.push(format!("local {rel} minibatch at zeta_star_sq = {zs}"));
    }
    let bad = rows.iter().filter(|r| r.compliant == Some(false)).count();
    if rows.iter().any(|r| r.compliant.is_some()) {
        verdicts.push(format!("{bad} explicit-bound violations"));
    }
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION,
        regime,
        params: params.clone(),
        bounds,
        rows,
        verdicts,
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record([
            "algo",
            "schedule",
            "eta_inner",
            "eta_outer",
            "replicate",
            "final_subopt",
            "explicit_bound",
            "compliant",
        ])?;
        for r in &self.rows {
            wr.serialize((
                &r.algo,
                &r.schedule,
                r.eta_inner,
                r.eta_outer,
                r.replicate,
                r.final_subopt,
                r.explicit_bound,
                r.compliant,
            ))?;
        }
        let buf = wr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(buf).map_err(|e| Error::Numeric(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_has_header() {
        let rep = emit_report(&[], &BoundParams::ones(), Regime::Convex).unwrap();
        assert!(rep.rows.is_empty());
        assert!(rep.to_json().contains("\"schema_version\": 1"));
        assert!(rep.to_csv().unwrap().starts_with("algo,schedule"));
    }
}
