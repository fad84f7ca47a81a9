use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, Output};

fn lbbd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbbd")).args(args).output().expect("binary runs")
}

fn instance(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances");
    root.join(name).to_string_lossy().into_owned()
}

fn report(out: &Output) -> HashMap<String, String> {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().next().expect("one report line");
    line.split(' ')
        .map(|kv| {
            let (k, v) = kv.split_once('=').expect("key=value");
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn solve_single_facility() {
    let out = lbbd(&["solve", "--instance", &instance("single.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "Optimal");
    assert_eq!(r["value"], "5");
    assert_eq!(r["iterations"], "1");
}

#[test]
fn iteration_budget_exit_code() {
    let out = lbbd(&["solve", "--instance", &instance("two-facility.json"), "--no-relax", "--iter-budget", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["status"], "BudgetExhausted");
    assert_eq!(r["value"], "-");
    assert!(r["lower_bound"].parse::<i64>().unwrap() <= r["upper_bound"].parse::<i64>().unwrap());
}

#[test]
fn modes_report_the_same_value() {
    for name in ["two-facility.json", "tardiness.json", "cost.json"] {
        let a = report(&lbbd(&["solve", "--instance", &instance(name), "--mode", "iterative"]));
        let b = report(&lbbd(&["solve", "--instance", &instance(name), "--mode", "bnc"]));
        assert_eq!(a["value"], b["value"], "{name}");
    }
}

#[test]
fn infeasible_exit_code() {
    let out = lbbd(&["solve", "--instance", &instance("infeasible.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["status"], "Infeasible");
}

#[test]
fn objective_override() {
    let out = lbbd(&["solve", "--instance", &instance("two-facility.json"), "--objective", "cost"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["objective"], "cost");
}

#[test]
fn trace_file_has_one_line_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.log");
    let out = lbbd(&["solve", "--instance", &instance("tardiness.json"), "--trace", path.to_str().unwrap()]);
    let r = report(&out);
    let log = std::fs::read_to_string(&path).unwrap();
    assert_eq!(log.lines().count().to_string(), r["iterations"]);
    for line in log.lines() {
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(fields.len(), 6, "{line}");
        assert!(fields[4].starts_with("cuts="));
        assert!(fields[5].starts_with("ms="));
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(lbbd(&["solve"]).status.code(), Some(1));
    assert_eq!(lbbd(&["solve", "--instance", &instance("single.json"), "--mode", "fast"]).status.code(), Some(1));
    assert_eq!(lbbd(&["solve", "--instance", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(lbbd(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn malformed_instance_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"objective\": \"makespan\",\n \"facilities\": [{\"id\": 0}], \"jobs\": []}").unwrap();
    let out = lbbd(&["solve", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn check_passes_on_a_seeded_family() {
    let out = lbbd(&["check", "--count", "25", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.ends_with(" pass")).count(), 75);
}

#[test]
fn check_with_no_instances() {
    let out = lbbd(&["check", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn injected_fault_is_reported_and_dumped() {
    let dir = tempfile::tempdir().unwrap();
    let out = lbbd(&[
        "check",
        "--count",
        "10",
        "--seed",
        "7",
        "--objective",
        "makespan",
        "--inject-fault",
        "--dump-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let dumped: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert!(!dumped.is_empty());
    let path = dumped[0].as_ref().unwrap().path();
    let replay = lbbd(&["solve", "--instance", path.to_str().unwrap()]);
    assert!(matches!(replay.status.code(), Some(0) | Some(2)));
}

#[test]
fn bench_rows() {
    let out = lbbd(&["bench", "--count", "0"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "instance,config,value,iterations,master_ms,subproblem_ms,total_ms");

    let out = lbbd(&["bench", "--instance", &instance("two-facility.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 2);

    let out = lbbd(&["bench", "--count", "4", "--seed", "3", "--ablate", "relax"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][1], "full");
        assert_eq!(pair[1][1], "no-relax");
        assert_eq!(pair[0][2], pair[1][2]);
    }
}
