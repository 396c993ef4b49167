use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn memdim(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_memdim"));
    cmd.current_dir(dir).args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("MEMDIM_")) {
        cmd.env_remove(k);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn memdim")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = memdim(dir, args, &[]);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_horizon_gives_single_row() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["simulate", "--t", "0", "--u0", "1,2,3", "--out", "o"]);
    let csv = std::fs::read_to_string(tmp.path().join("o/trajectory.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("# config={"));
    let rows = data_rows(&csv);
    assert_eq!(rows, vec!["0.0000000000000000e0,1.0000000000000000e0,2.0000000000000000e0,3.0000000000000000e0"]);
}

#[test]
fn blow_up_exits_three_with_partial_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = memdim(tmp.path(), &["simulate", "--t", "10", "--m1", "-1", "--out", "o"], &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("diverged"), "{err}");
    let csv = std::fs::read_to_string(tmp.path().join("o/trajectory.csv")).unwrap();
    let rows = data_rows(&csv);
    assert!(rows.len() > 1);
    let last_t: f64 = rows.last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(last_t < 10.0);
}

#[test]
fn golden_config_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "parameters": {"alpha": 9.5, "m0": 1.15},
        "simulate": {"t": 20, "u0": {"x": 0.2, "y": 0.0, "z": -0.1}},
        "lyapunov": {"t": 20, "history": [5, 10]}
    }"#;
    std::fs::write(tmp.path().join("golden.json"), cfg).unwrap();
    for run in ["a", "b"] {
        ok(tmp.path(), &["simulate", "--config", "golden.json", "--out", run]);
        ok(tmp.path(), &["lyapunov", "--config", "golden.json", "--out", run]);
    }
    for file in ["trajectory.csv", "lyapunov.json", "lyapunov_history.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs between runs");
    }
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), "{\n  \"integrator\": {\n    \"dt\": \"fast\"\n  }\n}").unwrap();
    let out = memdim(tmp.path(), &["simulate", "--config", "bad.json"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("integrator.dt") && err.contains("line 3"), "{err}");

    let out = memdim(tmp.path(), &["sweep", "--axis", "delta:0:1:2"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = memdim(tmp.path(), &["bound", "--m1=-0.5"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_sample_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = memdim(tmp.path(), &["dimension", "--m1=-1", "--out", "o"], &[]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn precedence_is_file_then_env_then_flag() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.json"), r#"{"parameters": {"alpha": 3, "beta": 4}}"#).unwrap();
    let alpha_beta = |out: &str| {
        let v = read_json(&tmp.path().join(out).join("converge.json"));
        (v["config"]["parameters"]["alpha"].as_f64().unwrap(), v["config"]["parameters"]["beta"].as_f64().unwrap())
    };
    assert!(memdim(tmp.path(), &["converge", "--config", "c.json", "--out", "f"], &[]).status.success());
    assert_eq!(alpha_beta("f"), (3.0, 4.0));
    assert!(memdim(tmp.path(), &["converge", "--config", "c.json", "--out", "e"], &[("MEMDIM_ALPHA", "5")]).status.success());
    assert_eq!(alpha_beta("e"), (5.0, 4.0));
    let out = memdim(tmp.path(), &["converge", "--config", "c.json", "--alpha", "6", "--out", "g"], &[("MEMDIM_ALPHA", "5")]);
    assert!(out.status.success());
    assert_eq!(alpha_beta("g"), (6.0, 4.0));
}

#[test]
fn reports_embed_config_and_version() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["bound", "--out", "o"]);
    ok(tmp.path(), &["equilibria", "--out", "o"]);
    for f in ["bound.json", "equilibria.json"] {
        let v = read_json(&tmp.path().join("o").join(f));
        assert_eq!(v["tool"], "memdim");
        assert!(v["version"].is_string());
        assert!(v["config"]["parameters"].is_object());
    }
    let bound = read_json(&tmp.path().join("o/bound.json"));
    assert_eq!(bound["result"]["bound_dim"], 3.0);
    assert_eq!(bound["result"]["converges"], false);
    assert_eq!(read_json(&tmp.path().join("o/equilibria.json"))["result"].as_array().unwrap().len(), 3);
}

fn sweep_rows(dir: &Path) -> Vec<Vec<String>> {
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    data_rows(&csv).iter().map(|r| r.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_across_m0_one_changes_equilibrium_count() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["sweep", "--axis", "m0:0.5:1.5:3", "--gamma", "0", "--x0", "0", "--out", "o"]);
    let rows = sweep_rows(&tmp.path().join("o"));
    let counts: Vec<&str> = rows.iter().map(|r| r[7].as_str()).collect();
    assert_eq!(counts, vec!["1", "1", "3"]);
}

#[test]
fn single_point_sweep_matches_single_run() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["sweep", "--axis", "alpha:10:10:1", "--out", "o"]);
    ok(tmp.path(), &["bound", "--out", "o"]);
    let rows = sweep_rows(&tmp.path().join("o"));
    assert_eq!(rows.len(), 1);
    let bound = read_json(&tmp.path().join("o/bound.json"));
    let from_sweep: f64 = rows[0][11].parse().unwrap();
    assert_eq!(from_sweep, bound["result"]["bound_dim"].as_f64().unwrap());
    let margin: f64 = rows[0][14].parse().unwrap();
    assert_eq!(margin, bound["result"]["convergence"]["margin"].as_f64().unwrap());
}

#[test]
fn interrupted_sweep_resumes_to_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let axes = ["--axis", "m0:0.8:1.4:4", "--axis", "alpha:8:10:2"];
    let mut full = vec!["sweep", "--out", "full"];
    full.extend(axes);
    ok(tmp.path(), &full);

    let mut part = vec!["sweep", "--out", "part", "--limit", "3"];
    part.extend(axes);
    ok(tmp.path(), &part);
    assert!(!tmp.path().join("part/sweep.csv").exists());
    // simulate a crash in the middle of a journal write
    let journal = tmp.path().join("part/sweep.journal.jsonl");
    let mut text = std::fs::read_to_string(&journal).unwrap();
    text.push_str("{\"index\":5,\"fie");
    std::fs::write(&journal, text).unwrap();

    let mut resume = vec!["sweep", "--out", "part", "--resume", "--limit", "2"];
    resume.extend(axes);
    ok(tmp.path(), &resume);
    let mut finish = vec!["sweep", "--out", "part", "--resume"];
    finish.extend(axes);
    ok(tmp.path(), &finish);

    let a = std::fs::read(tmp.path().join("full/sweep.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("part/sweep.csv")).unwrap();
    assert!(a == b, "resumed sweep differs from uninterrupted run");
    assert_eq!(sweep_rows(&tmp.path().join("full")).len(), 8);
}

#[test]
fn resume_with_changed_config_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["sweep", "--axis", "m0:0.8:1.4:3", "--limit", "1"]);
    let out = memdim(tmp.path(), &["sweep", "--axis", "m0:0.8:1.4:3", "--resume", "--alpha", "9"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_writes_verdict_and_probe_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "parameters": {"alpha": 0.5, "beta": -1, "gamma": 2, "m0": 0.5, "m1": 1, "x0": 0},
        "sampling": {"t_transient": 50, "t_sample": 10, "stride": 0.5},
        "classification": {"probes_per_equilibrium": 4, "t_transient": 30, "t_observe": 5}
    }"#;
    std::fs::write(tmp.path().join("c.json"), cfg).unwrap();
    ok(tmp.path(), &["classify", "--config", "c.json", "--dump-probes", "--out", "o", "--jobs", "2"]);
    let v = read_json(&tmp.path().join("o/classify.json"));
    let verdict = &v["result"]["classification"];
    assert_eq!(verdict["verdict"]["verdict"], "self-excited");
    assert_eq!(verdict["caveat"], false);
    let probes = std::fs::read_to_string(tmp.path().join("o/probes.csv")).unwrap();
    assert!(data_rows(&probes).len() > 100);
}

#[test]
fn dimension_report_carries_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "sampling": {"t_transient": 50, "t_sample": 20, "stride": 1},
        "dimension": {"horizons": [5, 10], "max_points": 10}
    }"#;
    std::fs::write(tmp.path().join("c.json"), cfg).unwrap();
    ok(tmp.path(), &["dimension", "--config", "c.json", "--out", "o", "--format", "json"]);
    let v = read_json(&tmp.path().join("o/dimension.json"));
    let report = &v["result"]["report"];
    assert_eq!(report["analytic_bound"], 3.0);
    assert!(report["max"].as_f64().unwrap() <= 3.0);
    assert_eq!(report["ladder"].as_array().unwrap().len(), 2);
    let dist = read_json(&tmp.path().join("o/dimension_distribution.json"));
    assert_eq!(dist["result"].as_array().unwrap().len(), 10);
}
