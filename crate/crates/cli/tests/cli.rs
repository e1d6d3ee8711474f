use std::path::PathBuf;
use std::process::{Command, Output};

use contest_core::format::Table;
use contest_core::optimizer::OptResult;
use contest_core::verify::VerifyReport;
use contest_core::StructureClass;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contest-opt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("contest-opt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn evaluate_hm_matches_closed_form() {
    let o = run(&["evaluate", "--n", "5", "--alpha", "0", "--beta", "2", "--policy", "hm"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::read(o.stdout.as_slice()).unwrap();
    let value = t.column_f64("value").unwrap()[0];
    let closed = t.column_f64("closed_form").unwrap()[0];
    assert!((closed - 1.0 / 3.0).abs() < 1e-9);
    assert!((value - closed).abs() <= 1e-5);
}

#[test]
fn evaluate_reports_order_violation() {
    let o = run(&["evaluate", "--n", "3", "--alpha", "0", "--beta", "2", "--policy", "0.2,0.3,0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("order violation"), "{}", stderr(&o));
}

#[test]
fn evaluate_parse_error_names_position() {
    let o = run(&["evaluate", "--n", "3", "--alpha", "0", "--policy", "0.5,x,0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("parse error at field 2"), "{}", stderr(&o));
}

#[test]
fn evaluate_json_is_parseable() {
    let o = run(&[
        "evaluate", "--n", "5", "--alpha", "0", "--beta", "2", "--policy", "0.4,0.2,0.2,0.2,0", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let value: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!(value > 0.4 && value < 0.45);
}

#[test]
fn optimize_round_trips_through_evaluate() {
    let out = scratch("bnb.json");
    let o = run(&[
        "optimize", "--method", "bnb", "--n", "5", "--alpha", "0.4", "--beta", "2", "--epsilon", "1e-4", "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("structure: TwoLevel"), "{}", stderr(&o));
    let r = OptResult::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.certified && r.gap.unwrap() <= 1e-4);
    assert!(matches!(r.structure(1e-6), StructureClass::TwoLevel { .. }));

    let e = run(&[
        "evaluate", "--n", "5", "--alpha", "0.4", "--beta", "2", "--rule", "trapezoid", "--quad-m", "20000",
        "--policy-file", out.to_str().unwrap(),
    ]);
    assert!(e.status.success(), "{}", stderr(&e));
    let value = Table::read(e.stdout.as_slice()).unwrap().column_f64("value").unwrap()[0];
    assert!((value - r.value).abs() < 1e-6, "{value} vs {}", r.value);
}

#[test]
fn optimize_two_contestants_short_circuits() {
    let o = run(&["optimize", "--method", "bnb", "--n", "2", "--alpha", "0.3", "--beta", "1"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("n = 2"));
    let r = OptResult::from_json(&stdout(&o)).unwrap();
    assert_eq!(r.policy.shares(), &[1.0, 0.0]);
}

#[test]
fn optimize_refuses_bnb_for_other_objectives() {
    let o = run(&["optimize", "--method", "bnb", "--n", "5", "--objective", "orderstat"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--method line"));
    let o = run(&["optimize", "--method", "line", "--n", "5", "--objective", "orderstat", "--steps", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn optimize_grid_budget_exit_code() {
    let o = run(&["optimize", "--method", "grid", "--n", "30", "--alpha", "0.5", "--granularity", "0.001"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn sweep_is_deterministic_and_readable() {
    let args = ["sweep", "--alpha-cells", "4", "--beta-cells", "3", "--steps", "50"];
    let a = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = bin().args(args).env("CONTEST_OPT_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let t = Table::read(a.stdout.as_slice()).unwrap();
    assert_eq!(t.header, ["alpha", "beta", "p1", "p2", "value", "structure_tag"]);
    assert_eq!(t.rows.len(), 12);
    let alpha = t.column_f64("alpha").unwrap();
    assert!(alpha.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn sweep_over_budget_needs_full() {
    let o = run(&["sweep", "--alpha-cells", "200", "--beta-cells", "200"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--full"));
}

#[test]
fn equilibrium_table_and_errors() {
    let o = run(&["equilibrium", "--policy", "hm", "--n", "5", "--beta", "2", "--points", "5"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("q_max: 1"));
    let t = Table::read(o.stdout.as_slice()).unwrap();
    let q = t.column_f64("q").unwrap();
    let f = t.column_f64("F").unwrap();
    for (q, f) in q.iter().zip(&f) {
        assert!((f - q.sqrt()).abs() < 1e-8);
    }
    let o = run(&["equilibrium", "--policy", "0.2,0.2,0.2,0.2,0.2", "--n", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trivial"));
}

#[test]
fn equilibrium_json_with_simulation_is_deterministic() {
    let args = [
        "equilibrium", "--policy", "two:0.6", "--n", "4", "--beta", "1.5", "--points", "11", "--simulate", "20000",
        "--seed", "5", "--format", "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["cdf"].as_array().unwrap().len(), 11);
    assert_eq!(v["simulation"]["seed"], 5);
}

#[test]
fn verify_subset_is_seeded() {
    let args = ["verify", "--only", "bernstein,minors", "--seed", "42", "--trials", "50"];
    let a = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let rep = VerifyReport::from_json_lines(&stdout(&a)).unwrap();
    assert!(rep.passed());
    assert!(rep.checks.iter().all(|c| c.seed == 42));
    assert!(rep.checks.iter().any(|c| c.name.starts_with("minors.")));
    assert!(!rep.checks.iter().any(|c| c.name.starts_with("schur.")));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--only", "nothing"]).status.code(), Some(1));
    assert_eq!(run(&["evaluate", "--n", "5", "--beta", "-1", "--alpha", "0", "--policy", "hm"]).status.code(), Some(1));
    let o = bin().args(["verify", "--only", "minors"]).env("CONTEST_OPT_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(run(&["--help"]).status.success());
}
