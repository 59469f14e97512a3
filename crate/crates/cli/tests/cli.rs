//! End-to-end checks of the binary: exit codes, reproducibility, and output
//! shapes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbm-sde"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().into()
}

#[test]
fn sample_row_count_and_reproducibility() {
    let args = [
        "sample", "--hurst", "0.75", "--n", "8", "--paths", "2", "--seed", "1", "--method",
        "circulant",
    ];
    let out = run(&args);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path_id,t,value"));
    assert_eq!(lines.count(), 18); // 2 paths x 9 nodes
    assert_eq!(stdout(&run(&args)), text);
    // a different seed changes the values
    let other = run(&[
        "sample", "--hurst", "0.75", "--n", "8", "--paths", "2", "--seed", "2", "--method",
        "circulant",
    ]);
    assert_ne!(stdout(&other), text);
}

#[test]
fn constants_prints_the_expected_values() {
    let out = run(&["constants", "--hurst", "0.75"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("beta_H=0.159641"), "{text}");
    assert!(text.contains("zeta_neg2H=-0.025485"), "{text}");
    assert!(text.contains("kappa=0.375"), "{text}");
}

#[test]
fn exit_codes() {
    // validation errors -> 1
    assert_eq!(run(&["constants", "--hurst", "1.2"]).status.code(), Some(1));
    assert_eq!(run(&["constants", "--bogus"]).status.code(), Some(1));
    // help -> 0
    assert!(run(&["--help"]).status.success());
    assert!(run(&["convergence", "--help"]).status.success());
    // runtime error (unreadable config path) -> 2
    assert_eq!(
        run(&["degeneracy", "--config", "/nonexistent/p.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn degeneracy_and_solve_on_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let langevin = write_config(
        dir.path(),
        "langevin.json",
        r#"{"hurst": 0.75, "x0": 0.1, "drift": "x", "diffusion": "1"}"#,
    );
    let degenerate = write_config(
        dir.path(),
        "degenerate.json",
        r#"{"hurst": 0.75, "x0": 0.1, "drift": "2+sin(x)", "diffusion": "2+sin(x)"}"#,
    );

    let out = run(&["degeneracy", "--config", &langevin]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("classification=non_degenerate"));
    let out = run(&["degeneracy", "--config", &degenerate]);
    assert!(stdout(&out).contains("classification=degenerate"));

    let out = run(&[
        "solve", "--config", &langevin, "--n", "16", "--seed", "3", "--scheme", "mcshane",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("t,b,x"));
    assert_eq!(text.lines().count(), 18);
}

#[test]
fn convergence_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let langevin = write_config(
        dir.path(),
        "langevin.json",
        r#"{"hurst": 0.75, "x0": 0.1, "drift": "x", "diffusion": "1"}"#,
    );
    let out_dir = dir.path().join("results");
    let out = Command::new(env!("CARGO_BIN_EXE_fbm-sde"))
        .env("FBM_SDE_THREADS", "2")
        .args([
            "convergence",
            "--config",
            &langevin,
            "--schemes",
            "mcshane",
            "--n",
            "8,16,32",
            "--paths",
            "100",
            "--seed",
            "5",
            "--fine-factor",
            "4",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("errors.csv")).unwrap();
    assert!(csv.starts_with("scheme,hurst,n,paths,rms_error"));
    assert_eq!(csv.lines().count(), 4);
    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("regression.csv").exists());
    // human table goes to stdout as well
    assert!(stdout(&out).contains("rate[mcshane]"));
}
