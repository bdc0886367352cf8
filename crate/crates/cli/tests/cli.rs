//! End-to-end checks of the command-line surfaces: output schemas, exact
//! matrix dumps, exit codes and byte-level determinism.

use std::process::{Command, Output};

fn bdpg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdpg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = bdpg(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn solve_emits_error_schema() {
    let csv = stdout(&[
        "solve", "--example", "1", "--alpha", "0.5", "--n", "4", "--steps", "10", "--times", "0.5,1.0",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "example,alpha,kappa,N,tau,t,linf,l2,h1");
    let first = lines.next().unwrap();
    assert!(first.starts_with("1,5.000000e-01,1.000000e+00,4,1.000000e-01,5.000000e-01,"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn solve_output_is_deterministic() {
    let args = [
        "solve", "--example", "2", "--alpha", "0.25", "--n", "4", "--steps", "5", "--times", "1.0",
    ];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn space_conv_reports_rates() {
    let csv = stdout(&[
        "space-conv", "--example", "1", "--alpha", "0.5", "--n", "2", "--n", "4", "--steps", "10",
        "--times", "1.0",
    ]);
    assert!(csv.starts_with("example,alpha,kappa,N,tau,t,linf,l2,h1,rate_linf,rate_l2,rate_h1\n"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",,,"), "first refinement row has no rates");
    let rate: f64 = rows[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!(rate > 1.0, "spatial rate should be positive, got {rate}");
}

#[test]
fn stability_emits_history_schema() {
    let csv = stdout(&[
        "stability", "--alpha", "0.5", "--n", "4", "--steps", "8",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,t,energy_norm,l2_norm");
    assert!(lines.next().unwrap().starts_with("# alpha="));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count() - 1, 9);
}

#[test]
fn matrices_blocks_contain_reference_entries() {
    let text = stdout(&["matrices", "--n", "6"]);
    assert!(text.contains("# G 5x7"));
    assert!(text.contains("# P 7x7"));
    assert!(text.contains("# Q 5x7"));
    assert!(text.contains("1,4/7,1/7,0,0,0,0"));
    assert!(text.contains("-43,-6,0,0,0,0,7"));
    assert!(text.contains("46/7,-24/7,-18/7,-4/7,0,0,0"));
}

#[test]
fn matrices_directory_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = bdpg(&["matrices", "--n", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    for name in ["C", "G", "P", "Q", "B", "A"] {
        assert!(dir.path().join(format!("{name}.csv")).exists(), "{name}.csv missing");
    }
    let b = std::fs::read_to_string(dir.path().join("B.csv")).unwrap();
    assert_eq!(b, "4/3\n");
    let a = std::fs::read_to_string(dir.path().join("A.csv")).unwrap();
    assert_eq!(a, "40/3\n");
}

#[test]
fn sparsity_report_and_pattern() {
    let csv = stdout(&["sparsity", "--n", "2", "--n", "6"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,order,bandwidth,nnz,density");
    assert_eq!(lines[1], "2,1,0,1,1.000000e+00");
    assert!(lines[2].starts_with("6,25,16,"));

    let dir = tempfile::tempdir().unwrap();
    let pattern = dir.path().join("pattern.csv");
    let out = bdpg(&["sparsity", "--n", "2", "--pattern", pattern.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&pattern).unwrap(), "row,col\n0,0\n");
}

#[test]
fn pattern_requires_single_degree() {
    let out = bdpg(&["sparsity", "--n", "2", "--n", "4", "--pattern", "/tmp/unused.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_example_is_a_usage_error() {
    let out = bdpg(&["solve", "--example", "7", "--n", "4", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("example"));
}

#[test]
fn time_conv_needs_two_refinements() {
    let out = bdpg(&["time-conv", "--alpha", "0.5", "--n", "4", "--steps", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tau_and_steps_conflict() {
    let out = bdpg(&["solve", "--n", "4", "--tau", "0.1", "--steps", "10"]);
    assert!(!out.status.success());
}

#[test]
fn output_file_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = bdpg(&[
        "sparsity", "--n", "4", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let content = std::fs::read_to_string(&path).unwrap();
    assert!(content.starts_with("N,order,bandwidth,nnz,density\n"));
}
