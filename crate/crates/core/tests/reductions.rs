use hetsgd::exec::with_threads;
use hetsgd::instances::{build_quadratic, QuadraticParams};
use hetsgd::{run, Algorithm, CommGeometry, Execution, RunOptions, Schedule};
use proptest::prelude::*;

fn bits(algo: &Algorithm, q: &dyn hetsgd::DistributedObjective, g: &CommGeometry, seed: u64, exec: Execution) -> Vec<u64> {
    let o = RunOptions {
        execution: exec,
        ..RunOptions::default()
    };
    let r = run(q, algo, g, seed, &o).unwrap();
    r.suboptimality_series
        .iter()
        .chain(&r.final_point)
        .map(|v| v.to_bits())
        .collect()
}

fn constant(eta: f64, local: bool) -> Algorithm {
    let schedule = Schedule::constant(eta);
    if local {
        Algorithm::Local { schedule }
    } else {
        Algorithm::Minibatch { schedule }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn family_reduces_exactly(m in 1usize..6, k in 1usize..6, r in 1usize..6, seed: u64,
        eta in 0.01f64..0.5, qseed in 0u64..100, sigma in 0.0f64..2.0) {
        let q = build_quadratic(&QuadraticParams {
            machines: m, dim: 3, smoothness: 1.0, strong_convexity: 0.0, heterogeneity: 1.0,
            sigma, common_hessian: false, seed: qseed,
        }).unwrap();
        let g = CommGeometry::new(m, k, r);
        let s = Execution::Sequential;
        prop_assert_eq!(
            bits(&constant(eta, false), &q, &g, seed, s),
            bits(&Algorithm::InnerOuter { eta_inner: 0.0, eta_outer: eta / k as f64 }, &q, &g, seed, s)
        );
        prop_assert_eq!(
            bits(&constant(eta, true), &q, &g, seed, s),
            bits(&Algorithm::InnerOuter { eta_inner: eta, eta_outer: eta }, &q, &g, seed, s)
        );
        prop_assert_eq!(
            bits(&constant(eta, true), &q, &g, seed, s),
            bits(&constant(eta, true), &q, &g.with_participants(m), seed, s)
        );
        let g1 = CommGeometry::new(m, 1, r);
        prop_assert_eq!(bits(&constant(eta, true), &q, &g1, seed, s), bits(&constant(eta, false), &q, &g1, seed, s));
    }

    #[test]
    fn parallel_matches_sequential(m in 1usize..8, k in 1usize..5, seed: u64, threads in 1usize..5, local: bool) {
        let q = build_quadratic(&QuadraticParams {
            machines: m, dim: 600, smoothness: 1.0, strong_convexity: 0.0, heterogeneity: 1.0,
            sigma: 1.0, common_hessian: true, seed: 1,
        }).unwrap();
        let g = CommGeometry::new(m, k, 3);
        let a = bits(&constant(0.3, local), &q, &g, seed, Execution::Sequential);
        let b = with_threads(threads, || bits(&constant(0.3, local), &q, &g, seed, Execution::Parallel));
        prop_assert_eq!(a, b);
    }
}
