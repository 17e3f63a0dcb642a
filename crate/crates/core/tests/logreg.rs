use hetsgd::logreg::idx::{parse_idx, write_idx_images, write_idx_labels, IdxArray};
use hetsgd::logreg::{
    build_logistic, build_tasks_and_assign, cache, measure_zeta_profile, newton_minimize, pca_reduce, synth_corpus,
    Corpus, IdxDataset, LogisticObjective, MachineData,
};
use hetsgd::objective::measure_zeta_star_sq;
use hetsgd::rng::{RngStream, StreamKey};
use hetsgd::{DistributedObjective, Error};
use nalgebra::DMatrix;

#[test]
fn idx_hand_buffer() {
    let mut b = vec![0u8, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2];
    b.extend([0, 255, 16, 32]);
    assert_eq!(b.len(), 20);
    match parse_idx(&b).unwrap() {
        IdxArray::Images { count, rows, cols, pixels } => {
            assert_eq!((count, rows, cols), (1, 2, 2));
            assert_eq!(pixels, vec![0, 255, 16, 32]);
        }
        other => panic!("{other:?}"),
    }
    assert!(parse_idx(&[0x12, 0x34, 0x56, 0x78, 0, 0, 0, 0]).unwrap_err().to_string().contains("unrecognized magic"));
    assert!(parse_idx(&b[..19]).unwrap_err().to_string().contains("short read"));
}

#[test]
fn newton_matches_a_scalar_bisection() {
    // points (+1, +1) and (-1, -1): both have margin x, so
    // F(x) = log(1 + e^{-x}) + 0.05 x^2 and F'(x) = -1/(1 + e^x) + 0.1 x
    let data = MachineData::new(1, vec![1.0, -1.0], vec![1.0, -1.0]).unwrap();
    let obj = LogisticObjective::new(vec![data], 0.1, true).unwrap();
    let sol = newton_minimize(&obj, 1e-10).unwrap();
    let fp = |x: f64| -1.0 / (1.0 + x.exp()) + 0.1 * x;
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fp(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((sol.x[0] - lo).abs() < 1e-9, "{} vs {lo}", sol.x[0]);
    assert!(sol.grad_norm < 1e-10);
    let solved = obj.solved(1e-10).unwrap();
    // one machine: the local gradient at x* is the stationarity residual
    assert!(measure_zeta_star_sq(&solved, None).unwrap() <= 1e-20);
}

#[test]
fn sign_symmetric_data_has_minimizer_zero() {
    let f = vec![0.5, 1.0, -0.5, -1.0, 2.0, 0.1, -2.0, -0.1];
    let data = MachineData::new(2, f, vec![1.0, 1.0, -1.0, -1.0]).unwrap();
    let obj = LogisticObjective::new(vec![data], 0.0, true).unwrap();
    // the pairs (phi, y) and (-phi, y) cancel at every x on the line x = 0
    let sol = newton_minimize(&obj, 1e-12);
    match sol {
        Ok(s) => assert!(s.x.iter().all(|v| v.abs() < 1e-9), "{:?}", s.x),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn looser_tolerance_needs_fewer_iterations() {
    let corpus = synth_corpus(1, 20, 10);
    let a = build_tasks_and_assign(&corpus, 0.5, 0, None).unwrap();
    let obj = LogisticObjective::new(corpus.machine_data(&a).unwrap(), 0.0, true).unwrap();
    let loose = newton_minimize(&obj, 1e-4).unwrap();
    let tight = newton_minimize(&obj, 1e-10).unwrap();
    assert!(loose.iterations < tight.iterations);
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

#[test]
fn pca_captures_the_top_eigenvalues() {
    let mut rng = RngStream::new(3, StreamKey::new(0, 0, 0, 0));
    let data = DMatrix::from_fn(50, 10, |_, j| rng.next_gaussian() * (1.0 + j as f64));
    let (proj, pca) = pca_reduce(&data, 3).unwrap();
    let gram = pca.basis.transpose() * &pca.basis;
    assert!((gram - DMatrix::<f64>::identity(3, 3)).amax() < 1e-8);
    let n = 50.0;
    let captured: f64 = (0..3).map(|c| proj.column(c).iter().map(|v| v * v).sum::<f64>() / n).sum();
    let mean: Vec<f64> = (0..10).map(|j| data.column(j).sum() / n).collect();
    let cov: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            (0..10)
                .map(|j| (0..50).map(|r| (data[(r, i)] - mean[i]) * (data[(r, j)] - mean[j])).sum::<f64>() / n)
                .collect()
        })
        .collect();
    let ev = jacobi_eigenvalues(cov);
    let top: f64 = ev[..3].iter().sum();
    assert!((captured - top).abs() < 1e-9 * top, "{captured} vs {top}");

    let (full, basis) = pca_reduce(&data, 10).unwrap();
    let recon = full * basis.basis.transpose();
    let centered = DMatrix::from_fn(50, 10, |r, j| data[(r, j)] - mean[j]);
    assert!((recon - centered).amax() < 1e-8);
    assert!(pca_reduce(&data, 11).is_err());
}

#[test]
fn mixing_fraction_controls_heterogeneity() {
    let corpus = synth_corpus(5, 40, 16);
    let prof = measure_zeta_profile(&corpus, &[1.0, 0.0], 2, None, 0.05).unwrap();
    assert_eq!(prof[0].0, 0.0);
    // p = 0 keeps a finite-sample floor, so only the ordering is checked
    assert!(prof[0].1 < prof[1].1, "{prof:?}");
}

#[test]
fn pipeline_is_a_pure_function_of_its_inputs() {
    let mut rng = RngStream::new(8, StreamKey::new(0, 0, 0, 0));
    let n = 10 * 12;
    let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
    let pixels: Vec<u8> = (0..n * 16)
        .map(|i| ((labels[i / 16] as u64 * 20 + rng.next_below(60)) % 256) as u8)
        .collect();
    let images = write_idx_images(n, 4, 4, &pixels);
    let lab = write_idx_labels(&labels);
    let go = || {
        let ds = IdxDataset::from_bytes(&images, &lab).unwrap();
        let c = Corpus::from_idx(&ds, Some(6)).unwrap();
        let obj = build_logistic(&c, 0.4, 9, None, 0.05, true).unwrap();
        obj.minimizer().unwrap().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    };
    assert_eq!(go(), go());
}

#[test]
fn cache_file_round_trip() {
    let c = synth_corpus(2, 5, 7);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.bin");
    cache::write_cache(&c, std::fs::File::create(&path).unwrap()).unwrap();
    let back = cache::read_cache(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, c);
    std::fs::write(&path, b"NOPE0000000000000000000000").unwrap();
    assert!(matches!(
        cache::read_cache(std::fs::File::open(&path).unwrap()),
        Err(Error::UnrecognizedMagic(_))
    ));
}

#[test]
fn insufficient_digits_are_reported() {
    let c = Corpus {
        dim: 1,
        features: vec![0.0; 9],
        labels: (0..9).collect(),
    };
    assert!(build_tasks_and_assign(&c, 0.5, 0, None).is_err());
}
