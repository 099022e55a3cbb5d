use std::process::{Command, Output};

use serde_json::Value;

fn lapzeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapzeta"))
        .args(args)
        .env_remove("LAPZETA_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scalar(o: &Output) -> f64 {
    stdout(o).trim().parse().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn logdet_examples() {
    let o = lapzeta(&["logdet", "--dims", "3", "--bc", "dirichlet"]);
    assert!(o.status.success());
    assert!((scalar(&o) - 3f64.ln()).abs() < 1e-15);
    assert_eq!(stdout(&o).trim().len(), "1.0986122886681098".len());
    let o = lapzeta(&[
        "logdet",
        "--dims",
        "3",
        "--bc",
        "periodic",
        "--exclude-zero-modes",
    ]);
    assert!((scalar(&o) - 9f64.ln()).abs() < 1e-14);
}

#[test]
fn exit_codes() {
    assert_eq!(
        lapzeta(&["logdet", "--dims", "2,2", "--bc", "periodic"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        lapzeta(&["logdet", "--dims", "2", "--bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(
        lapzeta(&["logdet", "--dims", "2", "--bc", "mobius"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lapzeta(&["zeta-det", "--box", "1", "--geometry", "torus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lapzeta(&["zeta-det", "--box", "1", "--abs-tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    let one_point = lapzeta(&["verify-hypercube", "--box", "1", "--u-grid", "8:8:linear"]);
    assert_eq!(one_point.status.code(), Some(2));
    let empty = String::from_utf8(one_point.stdout).unwrap();
    assert!(empty.is_empty());
}

#[test]
fn zeta_det_oracles() {
    let o = lapzeta(&["zeta-det", "--box", "1.0", "--format", "json"]);
    assert!((json(&o)["log_det"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    let o = lapzeta(&[
        "zeta-det",
        "--box",
        "1.0",
        "--mass",
        "1.0",
        "--geometry",
        "torus",
        "--format",
        "json",
    ]);
    let expected = (4.0 * 0.5f64.sinh().powi(2)).ln();
    assert!((json(&o)["log_det"].as_f64().unwrap() - expected).abs() < 1e-10);
    let o = lapzeta(&["zeta-det", "--box", "1,1", "--format", "json"]);
    let v = json(&o);
    let names: Vec<&str> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["name"].as_str().unwrap())
        .collect();
    assert_eq!(names.len(), 4);
    assert!(v["log_det"].as_f64().unwrap().is_finite());
}

#[test]
fn hypercube_report_files_and_show_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("cube");
    let base = base.to_str().unwrap();
    let o = lapzeta(&[
        "verify-hypercube",
        "--box",
        "1",
        "--u-grid",
        "8:512:geometric",
        "--out",
        base,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{base}.json")).unwrap()).unwrap();
    for r in report["records"].as_array().unwrap() {
        assert!(r["residual"].as_f64().unwrap().abs() <= 1e-6);
    }
    let csv = std::fs::read_to_string(format!("{base}.csv")).unwrap();
    assert!(csv.starts_with("u,logdet,predicted,residual\n"));
    assert_eq!(csv.lines().count(), 8);
    let shown = lapzeta(&["show", &format!("{base}.json")]);
    assert_eq!(stdout(&shown), stdout(&o));
}

#[test]
fn failed_check_exits_five_with_record() {
    let o = lapzeta(&[
        "verify-hypercube",
        "--box",
        "1,1",
        "--u-grid",
        "8:32:geometric",
        "--cauchy-tol",
        "1e-30",
    ]);
    assert_eq!(o.status.code(), Some(5));
    let record: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(record["status"], "assertion_failed");
    assert_eq!(record["failed"][0]["check"], "cauchy_last");
}

#[test]
fn ratio_flags_printed_side() {
    let o = lapzeta(&[
        "ratio2d",
        "--n1",
        "3",
        "--n2",
        "4",
        "--mass-squared",
        "0.5",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["corrected_matches"], true);
    assert_eq!(v["printed_matches"], false);
}

#[test]
fn reglim_one_dimensional_chain() {
    let o = lapzeta(&[
        "reglim",
        "--d",
        "1",
        "--n-grid",
        "8:1024:geometric",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert!(v["lim"].as_f64().unwrap().abs() < 1e-6);
    assert!((v["chain"]["log_det_predicted"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-6);
}

#[test]
fn massive_torus_verification() {
    let o = lapzeta(&[
        "verify-massive-torus",
        "--box",
        "1",
        "--mass",
        "1",
        "--u-grid",
        "16:256:geometric",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("u,logdet,predicted,residual\n"));
}

#[test]
fn chebyshev_outputs() {
    let o = lapzeta(&["chebyshev", "--n", "2", "--x", "2", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["full_cycle"].as_f64().unwrap().round(), 12.0);
    assert_eq!(v["half_index"].as_f64().unwrap().round(), 4.0);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_lapzeta"))
            .args([
                "logdet",
                "--dims",
                "60,50,40",
                "--bc",
                "free",
                "--exclude-zero-modes",
            ])
            .env("LAPZETA_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, run("4").stdout);
    assert_eq!(run("0").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
}
