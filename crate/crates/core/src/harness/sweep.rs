//! Grid sweeps over (geometry, algorithm, stepsize, replicate) cells.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::objective::DistributedObjective;
use crate::optimizers::{run, Algorithm, CommGeometry, RunOptions, RunResult, SuboptMode};

/// Version of the CSV column layout below.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Cell,
    Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: RowKind,
    pub instance: String,
    pub algo: String,
    #[serde(rename = "M")]
    pub machines: usize,
    #[serde(rename = "K")]
    pub local_steps: usize,
    #[serde(rename = "R")]
    pub rounds: usize,
    #[serde(rename = "S")]
    pub participants: usize,
    pub eta_inner: f64,
    pub eta_outer: f64,
    pub schedule: String,
    pub seed: u64,
    /// empty on summary rows
    pub replicate: Option<u64>,
    pub zeta_star_sq: f64,
    pub sigma: f64,
    /// mean over replicates on summary rows
    pub final_subopt: f64,
    /// standard error of the mean; empty on cell rows
    pub stderr: Option<f64>,
    pub rounds_to_tol: Option<usize>,
    pub subopt_mode: SuboptMode,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// one result per cell, in row order (summary rows excluded)
    pub results: Vec<RunResult>,
}

struct Cell {
    instance: usize,
    geom: CommGeometry,
    group: usize,
    variant: usize,
    algorithm: Algorithm,
    replicate: u64,
}

/// First round whose suboptimality is at most `tol` times the initial gap.
pub fn rounds_to_tol(series: &[f64], tol: f64) -> Option<usize> {
    let first = *series.first()?;
    if !(first > 0.0) {
        return Some(0);
    }
    series.iter().position(|&v| v <= tol * first)
}

fn nan_last(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Index of the smallest mean, NaN treated as +inf, ties toward the smaller
/// outer stepsize.
pub fn best_index(means: &[f64], etas: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..means.len() {
        let (a, b) = (nan_last(means[i]), nan_last(means[best]));
        if a < b || (a == b && etas[i] < etas[best]) {
            best = i;
        }
    }
    best
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs every cell of `cfg`. Cells are dispatched through `exec`; results are
/// gathered in cell order so the output does not depend on scheduling.
pub fn sweep(cfg: &ExperimentConfig, exec: Execution) -> Result<SweepOutput> {
    cfg.validate()?;
    let label = cfg.label();
    let counts = cfg.machine_counts();
    let mut objs: Vec<Box<dyn DistributedObjective>> = Vec::with_capacity(counts.len());
    for &m in &counts {
        objs.push(cfg.instance.with_machines(m).build()?);
    }

    let mut cells = Vec::new();
    let mut group = 0;
    for geom in cfg.geometries() {
        let inst = counts.iter().position(|&m| m == geom.machines).expect("machine count listed");
        for entry in &cfg.algorithms {
            for (variant, algorithm) in entry.variants().into_iter().enumerate() {
                for rep in 0..cfg.replicates as u64 {
                    cells.push(Cell {
                        instance: inst,
                        geom,
                        group,
                        variant,
                        algorithm: algorithm.clone(),
                        replicate: rep,
                    });
                }
            }
            group += 1;
        }
    }

    let outcomes = exec.map(&cells, |c| {
        let opts = RunOptions {
            replicate: c.replicate,
            ..RunOptions::default()
        };
        run(objs[c.instance].as_ref(), &c.algorithm, &c.geom, cfg.master_seed, &opts)
    });
    let results = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let row_for = |c: &Cell, res: &RunResult| {
        let obj = &objs[c.instance];
        let k = obj.constants();
        let (ei, eo) = c.algorithm.stepsizes();
        SweepRow {
            kind: RowKind::Cell,
            instance: label.clone(),
            algo: c.algorithm.name().to_string(),
            machines: c.geom.machines,
            local_steps: c.geom.local_steps,
            rounds: c.geom.rounds,
            participants: c.geom.participants(),
            eta_inner: ei,
            eta_outer: eo,
            schedule: c.algorithm.schedule_name().to_string(),
            seed: cfg.master_seed,
            replicate: Some(c.replicate),
            zeta_star_sq: k.zeta_star * k.zeta_star,
            sigma: k.sigma,
            final_subopt: res.final_suboptimality,
            stderr: None,
            rounds_to_tol: match res.subopt_mode {
                SuboptMode::Raw => None,
                _ => rounds_to_tol(&res.suboptimality_series, cfg.tol_fraction),
            },
            subopt_mode: res.subopt_mode,
        }
    };

    let mut rows = Vec::with_capacity(cells.len() + group);
    let mut start = 0;
    while start < cells.len() {
        let g = cells[start].group;
        let end = start + cells[start..].iter().take_while(|c| c.group == g).count();
        let mut per_variant: Vec<(usize, Vec<f64>)> = Vec::new();
        for i in start..end {
            rows.push(row_for(&cells[i], &results[i]));
            let v = cells[i].variant;
            match per_variant.last_mut() {
                Some((pv, vals)) if *pv == v => vals.push(results[i].final_suboptimality),
                _ => per_variant.push((v, vec![results[i].final_suboptimality])),
            }
        }
        let stats: Vec<(f64, f64)> = per_variant.iter().map(|(_, v)| mean_stderr(v)).collect();
        let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
        let first_cell = |v: usize| (start..end).find(|&i| cells[i].variant == v).expect("variant present");
        let etas: Vec<f64> = per_variant
            .iter()
            .map(|(v, _)| cells[first_cell(*v)].algorithm.stepsizes().1)
            .collect();
        let b = best_index(&means, &etas);
        let bi = first_cell(per_variant[b].0);
        let mut summary = row_for(&cells[bi], &results[bi]);
        summary.kind = RowKind::Summary;
        summary.replicate = None;
        summary.final_subopt = stats[b].0;
        summary.stderr = Some(stats[b].1);
        summary.rounds_to_tol = None;
        rows.push(summary);
        start = end;
    }
    Ok(SweepOutput { rows, results })
}

pub fn write_rows_csv<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wr.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub const CSV_COLUMNS: &[&str] = &[
    "kind",
    "instance",
    "algo",
    "M",
    "K",
    "R",
    "S",
    "eta_inner",
    "eta_outer",
    "schedule",
    "seed",
    "replicate",
    "zeta_star_sq",
    "sigma",
    "final_subopt",
    "stderr",
    "rounds_to_tol",
    "subopt_mode",
];

impl SweepOutput {
    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_rows_csv(&self.rows, &mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Numeric(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("rows serialize")
    }

    pub fn summaries(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Summary)
    }
}
