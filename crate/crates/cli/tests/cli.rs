use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qmod::modinv::agree;
use qmod::Field;
use qmod_cli::json::parse_series;
use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn qmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmod")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().expect("stderr line")).expect("stderr is JSON")
}

#[test]
fn d1_has_one_branch_with_the_unit_value() {
    let i = instance("q2_d1.json");
    let i = i.to_str().unwrap();
    let qj = qmod(&["--instance", i, "--no-cache", "quantum-j"]);
    assert_eq!(qj.status.code(), Some(0));
    let unit = qmod(&["--instance", i, "--no-cache", "ideal-j", "--ideal", "unit"]);
    let field = Field::prime(2).unwrap();
    let qj = stdout_json(&qj);
    let branches = qj["result"]["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 1);
    let limit = parse_series(&field, &branches[0]["limit"]).unwrap();
    let j1 = parse_series(&field, &stdout_json(&unit)["result"]["j"]).unwrap();
    assert!(agree(&limit, &j1, 16));
}

#[test]
fn epsilon_suite_passes() {
    let o = qmod(&["--instance", instance("q2_d2.json").to_str().unwrap(), "verify", "--suite", "epsilon-lattice"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["result"]["passed"], Value::Bool(true));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"q": 2, "a": "T^^2", "b": 1}"#).unwrap();
    let o = qmod(&["--instance", bad.to_str().unwrap(), "quantum-j"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "input");
    assert!(o.stdout.is_empty());

    let missing = dir.path().join("absent.json");
    assert_eq!(qmod(&["--instance", missing.to_str().unwrap(), "quantum-j"]).status.code(), Some(3));

    let i = instance("q2_d2.json");
    let i = i.to_str().unwrap();
    assert_eq!(qmod(&["--instance", i, "verify", "--suite", "nonsense"]).status.code(), Some(3));
    assert_eq!(qmod(&["--instance", i, "--no-cache", "drinfeld", "--gen", "f*f*"]).status.code(), Some(3));

    let o = qmod(&["--instance", i, "verify", "--suite", "binet", "--inject", "perturbed-recurrence"]);
    assert_eq!(o.status.code(), Some(1));
    let check = &stdout_json(&o)["result"]["checks"][0];
    assert_eq!((check["pass"].as_bool(), check["witness"]["n"].as_u64()), (Some(false), Some(3)));

    // too few N for the requested precision
    let o = qmod(&["--instance", instance("q2_d1.json").to_str().unwrap(), "--no-cache", "--precision", "64", "--n-max", "3", "quantum-j"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "undecided");
}

#[test]
fn cache_hits_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let i = instance("q3_d2.json");
    let args = ["--instance", i.to_str().unwrap(), "--cache-dir", cache.to_str().unwrap(), "ideal-j", "--ideal", "1"];
    let first = qmod(&args);
    let second = qmod(&args);
    assert_eq!(stderr_json(&first)["cache"], "miss");
    assert_eq!(stderr_json(&second)["cache"], "hit");
    assert_eq!(first.stdout, second.stdout);
    let mut uncached = args.to_vec();
    uncached.splice(2..4, ["--no-cache"]);
    assert_eq!(qmod(&uncached).stdout, first.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let i = instance("q2_d3.json");
    let run = |t: &str| qmod(&["--instance", i.to_str().unwrap(), "--no-cache", "--threads", t, "quantum-j"]).stdout;
    assert_eq!(run("1"), run("4"));
}
