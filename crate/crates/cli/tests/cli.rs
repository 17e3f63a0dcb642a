use std::path::Path;
use std::process::{Command, Output};

fn hetsgd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetsgd")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SINGLE: &str = r#"{
  "schema_version": 1,
  "instance": {"family": "quadratic", "machines": 3, "dim": 4, "H": 1.0,
               "lambda": 0.0, "heterogeneity": 1.0, "sigma": 0.5, "seed": 2},
  "algorithms": [{"algo": "minibatch", "schedule": {"kind": "constant", "eta": 0.5}}],
  "geometry": {"K": [3], "R": [5]},
  "master_seed": 1
}"#;

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_and_sweep_write_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "one.json", SINGLE);
    let o = hetsgd(&["run", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("kind,"), "{text}");
    assert_eq!(text.lines().count(), 3);

    let out = dir.path().join("res");
    let o = hetsgd(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&files[0]).unwrap()).unwrap();
    assert!(v.is_array() || v.is_object());
}

#[test]
fn seed_flag_changes_noisy_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "one.json", SINGLE);
    let a = hetsgd(&["run", "--config", &cfg, "--seed", "5"]).stdout;
    let b = hetsgd(&["run", "--config", &cfg, "--seed", "5", "--threads", "3"]).stdout;
    let c = hetsgd(&["run", "--config", &cfg, "--seed", "6"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &SINGLE.replace("minibatch", "nope"));
    assert_eq!(code(&hetsgd(&["sweep", "--config", &bad])), 1);
    assert_eq!(code(&hetsgd(&["sweep", "--config", "/nonexistent.json"])), 1);
    assert_eq!(code(&hetsgd(&["frobnicate"])), 1);
    assert_eq!(code(&hetsgd(&["bounds", "--params", "{\"H\": -1}"])), 1);
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.idx", "not an idx file at all");
    let o = hetsgd(&["data", "prep", "--idx-images", &junk, "--idx-labels", &junk, "--out", "/dev/null"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn lb_check_passes() {
    let o = hetsgd(&["lb-check", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn bounds_table_and_json() {
    let o = hetsgd(&["bounds", "--table"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().lines().count() > 10);
    let o = hetsgd(&["bounds", "--params", "{\"M\": 4, \"K\": 2, \"R\": 8}"]);
    assert_eq!(code(&o), 0);
    let _: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
}

#[test]
fn synth_cache_has_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.bin");
    let o = hetsgd(&["data", "synth", "--seed", "1", "--per-digit", "3", "--dim", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b = std::fs::read(&out).unwrap();
    assert_eq!(&b[..4], b"HSGD");
    assert_eq!(u16::from_le_bytes([b[4], b[5]]), 1);
}
