use hetsgd::harness::report::emit_report;
use hetsgd::harness::sweep::{best_index, sweep, RowKind};
use hetsgd::harness::{AlgorithmEntry, ExperimentConfig, GeometryGrid, OutputConfig, StepGrid, SCHEMA_VERSION};
use hetsgd::instances::{build_quadratic, InstanceSpec, QuadraticParams};
use hetsgd::optimizers::{average_iterates, multistage_stage_lengths, run_acsa, run_multistage_acsa, run_with_subset};
use hetsgd::rates::{BoundParams, Regime};
use hetsgd::{run, Algorithm, CommGeometry, DistributedObjective, Error, Execution, RunOptions, Schedule};

fn qparams(sigma: f64, lam: f64) -> QuadraticParams {
    QuadraticParams {
        machines: 4,
        dim: 5,
        smoothness: 1.0,
        strong_convexity: lam,
        heterogeneity: 0.5,
        sigma,
        common_hessian: false,
        seed: 12,
    }
}

fn config(sigma: f64, algos: Vec<AlgorithmEntry>, replicates: usize) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: Some("q".into()),
        instance: InstanceSpec::Quadratic(qparams(sigma, 0.05)),
        algorithms: algos,
        geometry: GeometryGrid {
            machines: None,
            local_steps: vec![4],
            rounds: vec![10],
            participants: None,
        },
        replicates,
        master_seed: 3,
        tol_fraction: 1e-6,
        output: OutputConfig::default(),
    }
}

fn entry(algo: Algorithm, grid: Option<StepGrid>) -> AlgorithmEntry {
    AlgorithmEntry { algorithm: algo, grid }
}

fn mb(eta: f64) -> Algorithm {
    Algorithm::Minibatch {
        schedule: Schedule::constant(eta),
    }
}

#[test]
fn single_cell_gives_two_rows() {
    let out = sweep(&config(1.0, vec![entry(mb(0.5), None)], 1), Execution::Sequential).unwrap();
    assert_eq!(out.rows.len(), 2);
    assert_eq!(out.rows[0].kind, RowKind::Cell);
    assert_eq!(out.rows[1].kind, RowKind::Summary);
    assert_eq!(out.rows[1].final_subopt, out.rows[0].final_subopt);
}

#[test]
fn replicates_differ_only_with_noise() {
    let noisy = sweep(&config(1.0, vec![entry(mb(0.5), None)], 2), Execution::Sequential).unwrap();
    assert_ne!(noisy.rows[0].final_subopt, noisy.rows[1].final_subopt);
    let quiet = sweep(&config(0.0, vec![entry(mb(0.5), None)], 2), Execution::Sequential).unwrap();
    assert_eq!(quiet.rows[0].final_subopt, quiet.rows[1].final_subopt);
}

#[test]
fn row_totals_and_best_stepsize_match_the_csv() {
    let grid = StepGrid::LogSpaced {
        points: 5,
        ln_min: -4.0,
        ln_max: 0.0,
    };
    let algos = vec![
        entry(mb(1.0), Some(grid.clone())),
        entry(
            Algorithm::Local {
                schedule: Schedule::constant(0.1),
            },
            Some(grid),
        ),
        entry(Algorithm::Acsa { regularize: false }, None),
    ];
    let cfg = config(1.0, algos, 3);
    let out = sweep(&cfg, Execution::Sequential).unwrap();
    assert_eq!(out.rows.len(), (5 + 5 + 1) * 3 + 3);

    let csv_text = out.to_csv().unwrap();
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let recs: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let head = rdr.headers().unwrap().clone();
    let col = |name: &str| head.iter().position(|h| h == name).unwrap();
    for algo in ["minibatch", "local"] {
        let cells: Vec<&csv::StringRecord> =
            recs.iter().filter(|r| &r[col("kind")] == "cell" && &r[col("algo")] == algo).collect();
        let mut etas: Vec<f64> = Vec::new();
        let mut means: Vec<f64> = Vec::new();
        for r in &cells {
            let eta: f64 = r[col("eta_outer")].parse().unwrap();
            let v: f64 = r[col("final_subopt")].parse().unwrap();
            match etas.iter().position(|&e| e == eta) {
                Some(i) => means[i] += v / 3.0,
                None => {
                    etas.push(eta);
                    means.push(v / 3.0);
                }
            }
        }
        let b = best_index(&means, &etas);
        let summary = recs
            .iter()
            .find(|r| &r[col("kind")] == "summary" && &r[col("algo")] == algo)
            .unwrap();
        assert_eq!(summary[col("eta_outer")].parse::<f64>().unwrap(), etas[b]);
        let mean: f64 = summary[col("final_subopt")].parse().unwrap();
        assert!((mean - means[b]).abs() <= 1e-12 * means[b].abs());
    }
}

#[test]
fn config_round_trips_and_rejects_unknown_names() {
    let cfg = config(1.0, vec![entry(mb(0.5), Some(StepGrid::List { values: vec![0.1, 0.2] }))], 2);
    let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
    let bad = cfg.to_json().replace("\"minibatch\"", "\"turbo\"");
    let err = ExperimentConfig::from_json(&bad).unwrap_err();
    assert!(err.is_config(), "{err}");
    let bad = cfg.to_json().replace("\"quadratic\"", "\"cubic\"");
    assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config(_))));
    let bad = cfg.to_json().replace("\"schema_version\": 1", "\"schema_version\": 9");
    assert!(ExperimentConfig::from_json(&bad).is_err());
}

#[test]
fn participants_out_of_range_is_rejected() {
    let q = build_quadratic(&qparams(0.0, 0.0)).unwrap();
    let g = CommGeometry::new(4, 2, 3);
    assert!(run_with_subset(&q, &mb(0.1), &g, 5, 0, &RunOptions::default()).is_err());
    assert!(run_with_subset(&q, &mb(0.1), &g, 0, 0, &RunOptions::default()).is_err());
    assert!(run(&q, &mb(0.1), &CommGeometry::new(3, 2, 3), 0, &RunOptions::default()).is_err());
}

#[test]
fn stepsize_cap_is_enforced() {
    let q = build_quadratic(&qparams(0.0, 0.0)).unwrap();
    let o = RunOptions {
        stepsize_cap: Some(0.5),
        ..RunOptions::default()
    };
    assert!(run(&q, &mb(0.6), &CommGeometry::new(4, 2, 3), 0, &o).is_err());
    assert!(run(&q, &mb(0.5), &CommGeometry::new(4, 2, 3), 0, &o).is_ok());
}

#[test]
fn averaging_uses_the_weights() {
    let h = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]];
    assert_eq!(average_iterates(&h, &[1.0, 0.0, 1.0]).unwrap(), vec![2.0, 3.0]);
    assert!(average_iterates(&h, &[1.0]).is_err());
}

#[test]
fn accelerated_methods_make_progress() {
    let q = build_quadratic(&qparams(0.0, 0.05)).unwrap();
    let g = CommGeometry::new(4, 3, 40);
    let start = q.value(&[0.0; 5]) - q.optimal_value().unwrap();
    let a = run_acsa(&q, &g, false, 1).unwrap();
    assert!(a.final_suboptimality < 1e-2 * start, "{}", a.final_suboptimality);
    let b = run_multistage_acsa(&q, &g, None, 1).unwrap();
    assert!(b.final_suboptimality < 1e-2 * start, "{}", b.final_suboptimality);
    let stages = multistage_stage_lengths(1.0, 0.05, 0.0, start, 40);
    assert_eq!(stages.iter().map(|s| s.0).sum::<usize>(), 40);
}

#[test]
fn report_flags_compliance_and_mismatch() {
    let q = build_quadratic(&qparams(1.0, 0.0)).unwrap();
    let c = q.constants().clone();
    let g = CommGeometry::new(4, 5, 20);
    let algo = Algorithm::Minibatch {
        schedule: Schedule::Theorem1Convex {
            smoothness: c.smoothness,
            radius: c.radius.unwrap(),
            sigma_star: c.sigma_star,
        },
    };
    let results: Vec<_> = (0..4)
        .map(|r| {
            let o = RunOptions {
                replicate: r,
                ..RunOptions::default()
            };
            run(&q, &algo, &g, 2, &o).unwrap()
        })
        .collect();
    let params = BoundParams {
        smoothness: Some(c.smoothness),
        radius: c.radius,
        sigma: Some(c.sigma),
        sigma_star: Some(c.sigma_star),
        zeta_star: Some(c.zeta_star),
        machines: Some(4.0),
        local_steps: Some(5.0),
        rounds: Some(20.0),
        ..BoundParams::default()
    };
    let rep = emit_report(&results, &params, Regime::Convex).unwrap();
    assert!(rep.rows.iter().all(|r| r.compliant == Some(true)));
    let again = emit_report(&results, &params, Regime::Convex).unwrap();
    assert_eq!(rep.to_json(), again.to_json());
    assert_eq!(rep.to_csv().unwrap(), again.to_csv().unwrap());
    let mut wrong = params.clone();
    wrong.rounds = Some(21.0);
    let err = emit_report(&results, &wrong, Regime::Convex).unwrap_err();
    assert!(err.to_string().contains("mismatch"), "{err}");
}
