use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pshlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pshlab"))
        .args(args)
        .current_dir(dir)
        .env("PSHLAB_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_psh_passes_on_square_norm() {
    let dir = tempfile::tempdir().unwrap();
    let o = pshlab(
        &["check-psh", "--func", "sq_norm", "--centers", "10", "--cylinders", "5", "--seed", "3", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["passed"], true);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["data"]["verdict"], "no-violation-found");
    assert_eq!(r["data"]["scan"]["violations"].as_array().unwrap().len(), 0);
    // the echo carries the resolved defaults
    assert_eq!(r["config"]["budget"], 4096);
    assert_eq!(r["config"]["dim"], 1);
}

#[test]
fn check_psh_fails_on_saddle() {
    let dir = tempfile::tempdir().unwrap();
    let o = pshlab(
        &["check-psh", "--func", "saddle:2", "--centers", "3", "--cylinders", "2", "--budget", "4096", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let r = read_json(&dir.path().join("r.json"));
    let v = &r["data"]["scan"]["violations"][0];
    assert!(v["margin"].as_f64().unwrap() < -1e-6);
    assert!(v["cylinder"].is_object());
}

#[test]
fn witness_certificate_for_negative_square_norm() {
    let dir = tempfile::tempdir().unwrap();
    let o = pshlab(
        &["witness", "--func", "neg_sq_norm", "--smax", "1e4", "--out", "cert.json", "--schedule-csv", "s.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&dir.path().join("cert.json"));
    assert_eq!(r["data"]["verdict"], "certificate");
    let cert = &r["data"]["certificate"];
    assert!(cert["e_mantissa"].as_f64().unwrap() < 0.0);
    assert!(cert["s"].as_f64().unwrap() <= 1e4);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("s,e_mantissa,e_log_scale,negative"));
    assert!(csv.trim_end().ends_with("true"));
}

#[test]
fn malformed_cylinder_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = pshlab(&["extend", "--func", "sq_norm", "--cylinder", "r=0.5,s=oops,seed=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cylinder.s"), "{}", stderr(&o));
    let o = pshlab(&["extend", "--func", "sq_norm", "--cylinder", "r=0.5,seed=1"], dir.path());
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("cylinder.s"), "{}", stderr(&o));
}

#[test]
fn config_file_keys_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "func = \"sq_norm\"\ncenters = 4\ncylinders = 2\nregion = \"ball:0.5\"\n").unwrap();
    let o = pshlab(&["check-psh", "--config", "run.toml", "--cylinders", "3", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["config"]["centers"], 4);
    assert_eq!(r["config"]["cylinders"], 3);
    assert_eq!(r["config"]["region"], "ball:0.5");
    assert_eq!(r["config"]["config_file"], "run.toml");

    std::fs::write(dir.path().join("bad.toml"), "centers = 4\n\nbudjet = 10\n").unwrap();
    let o = pshlab(&["check-psh", "--config", "bad.toml", "--func", "sq_norm"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.toml:3") && err.contains("budjet"), "{err}");
}

#[test]
fn coarse_chain_writes_a_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = pshlab(&["coarse-chain", "--func", "sq_norm", "--out", "chain.csv", "--report", "chain.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("chain.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 4 * 2 * 2);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
    let r = read_json(&dir.path().join("chain.json"));
    assert_eq!(r["checks"][1]["name"], "constant-growth");
    assert_eq!(r["checks"][1]["passed"], true);
}

#[test]
fn reruns_agree_and_threads_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["check-psh", "--func", "log1p_sq", "--centers", "5", "--cylinders", "2", "--seed", "9"];
    let mut runs = Vec::new();
    for name in ["a.json", "b.json"] {
        let mut a = args.to_vec();
        a.extend(["--out", name]);
        assert_eq!(pshlab(&a, dir.path()).status.code(), Some(0));
        let mut v = read_json(&dir.path().join(name));
        v.as_object_mut().unwrap().remove("wall_seconds");
        v["config"].as_object_mut().unwrap().remove("out");
        runs.push(v);
    }
    assert_eq!(runs[0], runs[1]);

    let o = Command::new(env!("CARGO_BIN_EXE_pshlab"))
        .args(args)
        .env("PSHLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("PSHLAB_THREADS"));
}

#[test]
fn unknown_corpus_id_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = pshlab(&["levi", "--func", "sinh", "--point", "[[0,0]]"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("func"), "{}", stderr(&o));
}
