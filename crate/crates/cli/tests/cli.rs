use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mhdeoct_cli::report::parse_csv;
use mhdeoct_cli::{run_experiment, tune_alpha, AlphaSpec, ExperimentConfig, Method, RunReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mhdeoct"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Two classes split by a wide gap on one feature, plus a noise column.
fn separable(dir: &Path) -> PathBuf {
    let mut text = String::from("x,noise,class\n");
    for i in 0..40 {
        let (x, label) = if i < 20 { (i, "lo") } else { (i + 30, "hi") };
        text.push_str(&format!("{x},{},{label}\n", (i * 7) % 5));
    }
    write(dir, "separable.csv", &text)
}

fn quick(path: &Path, method: Method) -> ExperimentConfig {
    ExperimentConfig {
        pop: Some(30),
        gens: Some(40),
        reps: 3,
        ..ExperimentConfig::new(path, method)
    }
}

#[test]
fn cart_on_pure_labels_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "pure.csv",
        &(0..20).fold("a,class\n".to_string(), |s, i| s + &format!("{i},only\n")),
    );
    let report = run_experiment(&quick(&path, Method::Cart)).unwrap();
    assert!(report.repetitions.iter().all(|r| r.train_accuracy == 100.0));
}

#[test]
fn mh_on_separable_data_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&quick(&separable(dir.path()), Method::MhDeoct)).unwrap();
    assert!(report
        .repetitions
        .iter()
        .all(|r| r.test_accuracy == 100.0 && r.train_accuracy == 100.0));
}

#[test]
fn shorter_runs_are_prefixes() {
    let dir = tempfile::tempdir().unwrap();
    let path = separable(dir.path());
    let long = run_experiment(&ExperimentConfig {
        reps: 4,
        ..quick(&path, Method::Deoct)
    })
    .unwrap();
    let short = run_experiment(&ExperimentConfig {
        reps: 2,
        ..quick(&path, Method::Deoct)
    })
    .unwrap();
    let strip = |r: &RunReport| r.without_timing().repetitions;
    assert_eq!(strip(&short)[..], strip(&long)[..2]);
}

#[test]
fn singleton_grid_picks_its_only_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = separable(dir.path());
    let cfg = ExperimentConfig {
        alpha: AlphaSpec::Grid(vec![0.0]),
        ..quick(&path, Method::Cart)
    };
    let (alphas, report) = tune_alpha(&cfg).unwrap();
    assert_eq!(alphas, vec![0.0; 3]);
    assert!(report.tuned);
    assert!(report.repetitions.iter().all(|r| r.validation_accuracy.is_some()));
}

#[test]
fn huge_penalty_in_grid_gives_empty_tree() {
    let dir = tempfile::tempdir().unwrap();
    let path = separable(dir.path());
    let cfg = ExperimentConfig {
        alpha: AlphaSpec::Grid(vec![1.5]),
        ..quick(&path, Method::MhDeoct)
    };
    let report = run_experiment(&cfg).unwrap();
    assert!(report.repetitions.iter().all(|r| r.active_splits == 0));
}

#[test]
fn aggregates_match_rows() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&quick(&separable(dir.path()), Method::Deoct)).unwrap();
    let n = report.repetitions.len() as f64;
    let mean = report.repetitions.iter().map(|r| r.fitness).sum::<f64>() / n;
    assert!((report.mean.fitness - mean).abs() <= 1e-9 * mean.abs().max(1.0));
}

#[test]
fn binary_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = separable(dir.path());
    let csv_out = dir.path().join("r.csv");
    let status = bin()
        .args([
            "--data",
            data.to_str().unwrap(),
            "--method",
            "cart",
            "--depth",
            "2",
            "--reps",
            "4",
        ])
        .args(["--format", "csv", "--out", csv_out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let rows = parse_csv(&fs::read_to_string(&csv_out).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);

    let json_out = dir.path().join("r.json");
    let status = bin()
        .args([
            "--data",
            data.to_str().unwrap(),
            "--method",
            "mh-deoct",
            "--pop",
            "20",
            "--gens",
            "20",
            "--reps",
            "2",
        ])
        .args(["--out", json_out.to_str().unwrap()])
        .env("MHDEOCT_WORKERS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    let report = RunReport::from_json(&fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(report.method, "mh-deoct");
    assert_eq!(report.repetitions.len(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = separable(dir.path());
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    let d = data.to_str().unwrap();
    assert_eq!(code(&["--data", d, "--method", "cart", "--reps", "1"]), Some(0));
    assert_eq!(code(&["--data", d, "--reps", "0"]), Some(1));
    assert_eq!(code(&["--data", d, "--depth", "2", "--mh-depth", "3"]), Some(1));
    assert_eq!(code(&["--data", d, "--no-such-flag"]), Some(1));
    assert_eq!(code(&["--data", "missing.csv"]), Some(2));
    let bad = write(dir.path(), "bad.csv", "x,class\n1,a\nzz,b\n");
    assert_eq!(code(&["--data", bad.to_str().unwrap()]), Some(2));

    // Three columns of 2250 distinct training values exceed the exact
    // depth-2 budget.
    let big = (0..3000).fold("x,y,z,class\n".to_string(), |s, i| {
        s + &format!("{i},{},{},{}\n", (i * 7) % 3000, (i * 11) % 3000, i % 2)
    });
    let big = write(dir.path(), "big.csv", &big);
    assert_eq!(
        code(&["--data", big.to_str().unwrap(), "--method", "oracle-d2", "--reps", "1"]),
        Some(3)
    );
}
