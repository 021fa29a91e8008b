use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsinflation")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

const SMALL: &[&str] = &["--set", "family.shells=[4,8]", "--n", "32", "--t-end", "0.2"];

#[test]
fn manifest_reflects_overrides() {
    let v = stdout_json(&cli(&["construct", "--manifest", "--q", "3", "--set", "solver.n=64", "--seed", "9"]));
    assert_eq!(v["q"], 3.0);
    assert_eq!(v["solver"]["n"], 64);
    assert_eq!(v["seed"], 9);
    // flags override --set
    let v = stdout_json(&cli(&["inflate", "--manifest", "--set", "q=5", "--q", "1.5"]));
    assert_eq!(v["q"], 1.5);
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"q": 0.75, "family": {"k": 3, "r": 1, "shells": [18]}}"#).unwrap();
    let v = stdout_json(&cli(&["construct", "--manifest", "--config", p.to_str().unwrap()]));
    assert_eq!(v["q"], 0.75);
    assert_eq!(v["family"]["k"], 3);
    std::fs::write(&p, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(code(&cli(&["construct", "--config", p.to_str().unwrap()])), 2);
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(code(&cli(&["construct", "--set", "noequals"])), 2);
    assert_eq!(code(&cli(&["solve", "--n", "100"])), 2);
    assert_eq!(code(&cli(&["construct", "--q", "-1"])), 2);
    assert_eq!(code(&cli(&["ladder", "--q", "0.5"])), 2);
    assert_eq!(code(&cli(&["inflate", "--nu", "0.5", "--set", "family.shells=[4,8]", "--n", "32"])), 2);
    assert_eq!(code(&cli(&["norm", "--field", "/nonexistent/field.json"])), 2);
}

#[test]
fn over_budget_sweep_exits_4() {
    let o = cli(&["sweep", "--set", "sweep.q=[1,2,3]", "--set", "sweep.r=[1,2]", "--set", "budget=5"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn construct_iterate_norm_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = stdout_json(&cli(&["construct", "--q", "1"]));
    assert_eq!(data["q"], 1.0);
    let init = d.join("initial.json");
    std::fs::write(&init, serde_json::to_string(&data).unwrap()).unwrap();
    let it = stdout_json(&cli(&["iterate", "--input", init.to_str().unwrap()]));
    for key in ["u1", "u10", "u11", "b_n1", "b_n2", "b_n3", "resonances"] {
        assert!(it.get(key).is_some(), "{key}");
    }
    let u1 = d.join("u1.json");
    std::fs::write(&u1, serde_json::to_string(&it["u1"]).unwrap()).unwrap();
    let f = u1.to_str().unwrap();
    let linf = stdout_json(&cli(&["norm", "--field", f, "--kind", "linf", "--t", "0.01"]));
    let besov = stdout_json(&cli(&["norm", "--field", f, "--kind", "besov", "--t", "0.01"]));
    assert!(linf["value"].as_f64().unwrap() > 0.0);
    assert!(besov["value"].as_f64().unwrap() > 0.0);
}

fn snapshot_in(d: &Path) -> std::path::PathBuf {
    let mut v: Vec<_> = std::fs::read_dir(d.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "bin"))
        .collect();
    v.sort();
    v.pop().unwrap()
}

#[test]
fn solve_writes_snapshots_and_norm_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut args = vec!["solve", "-o", d.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    let o = cli(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("time,energy,enstrophy,max_divergence"));
    let snap = snapshot_in(d);
    assert!(snap.with_extension("json").exists());
    let s = snap.to_str().unwrap();
    let b = stdout_json(&cli(&["norm", "--field", s, "--kind", "besov"]));
    assert!(b["value"].as_f64().unwrap() > 0.0);
    // X_T of a single snapshot is not defined
    assert_eq!(code(&cli(&["norm", "--field", s, "--kind", "xt"])), 3);
}

#[test]
fn inflate_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut args = vec!["inflate", "-o", d.to_str().unwrap(), "--q", "1.5"];
    args.extend_from_slice(SMALL);
    let o = cli(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.json", "report.json", "norms.csv", "besov_curve.csv", "audit.csv", "plot.dat", "plot.gp"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["params"]["q"], 1.5);
}

#[test]
fn ladder_and_sweep_outputs() {
    let l = stdout_json(&cli(&["ladder", "--q", "2", "--set", "family.shells=[8,32]"]));
    assert_eq!(l["beta"], 2);
    let mut args = vec!["sweep", "--set", "sweep.q=[0.5,1]"];
    args.extend_from_slice(SMALL);
    let o = cli(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("index,q,r,k"));
}
