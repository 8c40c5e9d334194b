//! End-to-end tests of the `sptrsv` binary over a small fixture file.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sptrsv")
}

fn write_chain6(dir: &Path) -> PathBuf {
    let path = dir.join("chain6.mtx");
    fs::write(&path, sptrsv_core::synth::chain6_mtx()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn report_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_reports_baseline_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_chain6(dir.path());
    let report = dir.path().join("report.json");
    let profile = dir.path().join("profile.csv");

    let out = run(&[
        "analyze",
        "--matrix",
        matrix.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--profile-before",
        profile.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let json = report_json(&report);
    assert_eq!(json["n"], 6);
    assert_eq!(json["nnz_lower"], 11);
    assert_eq!(json["num_levels_before"], 5);
    assert_eq!(json["num_levels_after"], 5);
    assert_eq!(json["avg_level_cost_before"], 3.2);
    assert_eq!(json["total_level_cost_before"], 16);
    assert_eq!(json["rows_rewritten"], 0);
    assert_eq!(json["barriers"], 4);
    assert_eq!(json["strategy"], "none");
    assert!(json.get("verify").is_none());

    let csv = fs::read_to_string(&profile).unwrap();
    assert!(csv.starts_with("level,rows,cost\n0,1,1\n1,2,6\n"));
}

#[test]
fn transform_avg_reports_before_and_after() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_chain6(dir.path());
    let report = dir.path().join("report.json");
    let before = dir.path().join("before.csv");
    let after = dir.path().join("after.csv");

    let out = run(&[
        "transform",
        "--matrix",
        matrix.to_str().unwrap(),
        "--strategy",
        "avg",
        "--report",
        report.to_str().unwrap(),
        "--profile-before",
        before.to_str().unwrap(),
        "--profile-after",
        after.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let json = report_json(&report);
    assert_eq!(json["strategy"], "avg");
    assert_eq!(json["threshold"], 3.2);
    assert_eq!(json["num_levels_after"], 4);
    assert_eq!(json["total_level_cost_after"], 15);
    assert_eq!(json["rows_rewritten"], 1);
    assert_eq!(json["max_rewriting_distance_used"], 1);

    assert_ne!(
        fs::read_to_string(&before).unwrap(),
        fs::read_to_string(&after).unwrap()
    );
}

#[test]
fn transform_without_strategy_fails() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_chain6(dir.path());
    let out = run(&["transform", "--matrix", matrix.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn solve_transformed_passes_tight_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_chain6(dir.path());
    let report = dir.path().join("report.json");
    let solution = dir.path().join("x.txt");

    let out = run(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--strategy",
        "avg",
        "--tol",
        "1e-12",
        "--workers",
        "4",
        "--report",
        report.to_str().unwrap(),
        "--solution",
        solution.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let json = report_json(&report);
    assert_eq!(json["barriers"], 3);
    assert_eq!(json["verify"]["pass"], true);
    assert_eq!(json["verify"]["max_abs_error"], 0.0);

    let lines: Vec<String> = fs::read_to_string(&solution)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(lines.len(), 6);
    for line in lines {
        let v: f64 = line.parse().unwrap();
        assert_eq!(v, 1.0);
    }
}

#[test]
fn solve_identity_returns_rhs_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("identity.mtx");
    fs::write(
        &matrix,
        "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 2\n2 2 4\n3 3 8\n",
    )
    .unwrap();
    let rhs = dir.path().join("b.txt");
    fs::write(&rhs, "3.5\n-1.25\n0.75\n").unwrap();
    let solution = dir.path().join("x.txt");

    let out = run(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
        "--strategy",
        "manual",
        "--solution",
        solution.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let values: Vec<f64> = fs::read_to_string(&solution)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values, vec![3.5 / 2.0, -1.25 / 4.0, 0.75 / 8.0]);
}

#[test]
fn codegen_writes_deterministic_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_chain6(dir.path());
    let kernel_a = dir.path().join("a.c");
    let kernel_b = dir.path().join("b.c");
    let report = dir.path().join("report.json");

    for kernel in [&kernel_a, &kernel_b] {
        let out = run(&[
            "codegen",
            "--matrix",
            matrix.to_str().unwrap(),
            "--emit",
            kernel.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read_to_string(&kernel_a).unwrap();
    let b = fs::read_to_string(&kernel_b).unwrap();
    assert_eq!(a, b);
    assert!(a.contains("void calculate0(double* x) {"));
    assert!(a.contains("void calculate4(double* x) {"));

    let json = report_json(&report);
    assert_eq!(json["code_size_bytes"], a.len());
}

#[test]
fn codegen_empty_plan_matches_strategy_none() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_chain6(dir.path());
    let plain = dir.path().join("plain.c");
    let guarded = dir.path().join("guarded.c");

    let out = run(&[
        "codegen",
        "--matrix",
        matrix.to_str().unwrap(),
        "--emit",
        plain.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // max-distance 0 rejects every rewrite, so the plan is empty
    let out = run(&[
        "codegen",
        "--matrix",
        matrix.to_str().unwrap(),
        "--strategy",
        "avg",
        "--max-distance",
        "0",
        "--emit",
        guarded.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(&plain).unwrap(),
        fs::read_to_string(&guarded).unwrap()
    );
}

#[test]
fn reports_are_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_chain6(dir.path());
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for report in [&r1, &r2] {
        let out = run(&[
            "transform",
            "--matrix",
            matrix.to_str().unwrap(),
            "--strategy",
            "manual",
            "--group-size",
            "3",
            "--report",
            report.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
}

#[test]
fn failed_verification_exits_nonzero_with_magnitudes() {
    let dir = tempfile::tempdir().unwrap();
    // ten independent rows followed by a thin 30-level chain of cost-3 rows;
    // folding 1/3 coefficients makes the transformed solve differ from the
    // reference in the last ulps, so --tol 0 cannot pass
    let matrix = dir.path().join("chain.mtx");
    let mut text = String::from("%%MatrixMarket matrix coordinate real general\n40 40 70\n");
    for i in 1..=10 {
        text.push_str(&format!("{i} {i} 3\n"));
    }
    for i in 11..=40 {
        text.push_str(&format!("{i} {} -1\n{i} {i} 3\n", i - 1));
    }
    fs::write(&matrix, text).unwrap();
    let rhs = dir.path().join("b.txt");
    fs::write(&rhs, "1\n".repeat(40)).unwrap();

    let out = run(&[
        "solve",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
        "--strategy",
        "avg",
        "--tol",
        "0",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("verification failed"), "stderr: {stderr}");
    assert!(stderr.contains("max_rel_error"), "stderr: {stderr}");
}

#[test]
fn missing_matrix_file_exits_nonzero() {
    let out = run(&["analyze", "--matrix", "/nonexistent/never.mtx"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("never.mtx"));
}

#[test]
fn malformed_matrix_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("bad.mtx");
    fs::write(
        &matrix,
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n5 1 1.0\n",
    )
    .unwrap();
    let out = run(&["analyze", "--matrix", matrix.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}
