use std::process::{Command, Output};

use coopreg::simkit::builtin;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopreg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn design_exit_codes() {
    let ok = run(&["design", "--scenario", "example1", "--h", "0.2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("feasible      true"));
    let bad = run(&["design", "--scenario", "example1", "--h", "0.04"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("feasible      false"));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(run(&["design", "--scenario", "missing.json", "--h", "0.1"]).status.code(), Some(1));
    assert_eq!(run(&["design", "--scenario", "example1"]).status.code(), Some(1));
    assert_eq!(run(&["design", "--scenario", "example1", "--h", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["example", "4"]).status.code(), Some(1));
    assert_eq!(run(&["sweep-h", "--scenario", "example1", "--from", "0.1", "--to", "0.05", "--step", "0.01"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn auto_gain_refused_past_pathological_period() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    builtin::example1_with(0.03, coopreg::simkit::GainSpec::AUTO).save(&path).unwrap();
    let o = run(&["simulate", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn design_json_is_parseable() {
    let o = run(&["design", "--scenario", "example1", "--h", "0.2", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["feasible"], true);
    assert!((v["intersection"][1].as_f64().unwrap() - 50.2333).abs() < 1e-3);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 6);
}

#[test]
fn mu_interval_and_sweep() {
    let o = run(&["mu-interval", "--scenario", "example1", "--h", "0.2", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["intersection"].is_array());
    assert_eq!(run(&["mu-interval", "--scenario", "example1", "--h", "0.04"]).status.code(), Some(2));

    let o = run(&["sweep-h", "--scenario", "example1", "--from", "0.01", "--to", "0.05", "--step", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("h "));
    assert!(lines[1].contains("true") && lines[5].contains("false"));
}

#[test]
fn bounds_csv() {
    let o = run(&["bounds", "--scenario", "example2", "--alpha", "0.25", "--k-max", "100", "--k-step", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,s,tau_d");
    assert_eq!(lines.len(), 5);
    let last: Vec<f64> = lines[4].split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    assert!(lines[4].starts_with("inf,"));
    assert!(last[0] > 0.0 && last[1] > 0.0);
    let mixed = run(&["bounds", "--scenario", "example3", "--alpha", "0.5"]);
    assert_eq!(mixed.status.code(), Some(0));
}

#[test]
fn regulator_prints_solution() {
    let o = run(&["regulator", "--scenario", "example3", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 7);
    for f in arr {
        assert!(f["residual_state"].as_f64().unwrap() < 1e-10);
        assert!((f["x"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
    assert_eq!(run(&["regulator", "--scenario", "example1"]).status.code(), Some(1));
}

#[test]
fn simulate_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&["simulate", "--scenario", "example2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["trace.csv", "observer_events.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,k,v_1,v_2"));
    assert_eq!(csv.lines().count(), 1 + 2001);

    let o = run(&["simulate", "--scenario", "example2", "--format", "json"]);
    let trace = coopreg::Trace::from_json(&stdout(&o)).unwrap();
    assert_eq!(trace.followers, 4);
}

#[test]
fn example_summary() {
    let o = run(&["example", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["regulated"], "true");
}
