use std::path::Path;
use std::process::{Command, Output};

fn qbplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbplab"))
        .args(args)
        .env_remove("QBPLAB_JOBS")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn built_perm_program_validates() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("perm.qbp");
    assert!(qbplab(&["build", "--family", "perm", "--n", "2", "--out", p(&f)]).status.success());
    let o = qbplab(&["validate", p(&f)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("ok"));
}

#[test]
fn eval_fig1_accepts_equal_bits() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fig1.qbp");
    assert!(qbplab(&["build", "--family", "fig1", "--out", p(&f)]).status.success());
    let o = qbplab(&["--json", "eval", p(&f), "--input", "00", "--steps", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let p1 = v["p"][1].as_f64().unwrap();
    assert!((p1 - 1.0).abs() < 1e-12, "{v}");
}

#[test]
fn wrong_input_length_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fig1.qbp");
    qbplab(&["build", "--family", "fig1", "--out", p(&f)]);
    let o = qbplab(&["eval", p(&f), "--input", "000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("variables"));
}

#[test]
fn malformed_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.qbp");
    std::fs::write(&f, "this is not a program\n").unwrap();
    assert_eq!(qbplab(&["validate", p(&f)]).status.code(), Some(2));
}

#[test]
fn deterministic_obdd_validates_in_its_mode() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("disj.qbp");
    qbplab(&["build", "--family", "disj", "--n", "4", "--out", p(&f)]);
    assert!(qbplab(&["validate", p(&f)]).status.success());
}

#[test]
fn seeded_experiment_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |out: &Path, jobs: &str| {
        let o = qbplab(&[
            "experiment", "perm-error", "--n", "3", "--samples", "40", "--seed", "11", "--jobs", jobs, "--csv", p(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&a, "1");
    run(&b, "4");
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    assert!(String::from_utf8_lossy(&x).starts_with("index,input,is_perm,p_0,p_1,p_?\n"));
}

#[test]
fn json_summary_for_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("m.csv");
    let o = qbplab(&["--json", "experiment", "min-obdd", "--n", "4", "--function", "ip", "--csv", p(&c)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["size"], 8);
    assert_eq!(v["ok"], true);
}

#[test]
fn oracle_min_obdd_sizes() {
    let o = qbplab(&["oracle", "min-obdd", "--family", "xor", "--n", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("size 9"), "{}", stdout(&o));
}

#[test]
fn clock_transform_round_trips_through_validation() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.qbp");
    let g = dir.path().join("pc.qbp");
    qbplab(&["build", "--family", "perm", "--n", "2", "--out", p(&f)]);
    assert!(qbplab(&["transform", "clock", p(&f), p(&g), "--t", "3"]).status.success());
    assert!(qbplab(&["validate", p(&g)]).status.success());
}

#[test]
fn qtm_simulation_runs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("m.json");
    std::fs::write(&spec, qbplab::qtm::parity_machine(3).to_json()).unwrap();
    let o = qbplab(&["qtm", "simulate", p(&spec), "--input", "101", "--steps", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
