use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_probstrat")).args(args).env_remove("PROBSTRAT_CONFIG").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(name: &str) -> String {
    corpus(name).to_string_lossy().into_owned()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("probstrat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn trace_value_and_envelope() {
    let out = run(&["trace", &path("happy.prog"), "--play", "Happy?1.Happy?0.Bye"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "probstrat/result/v1");
    assert_eq!(v["command"], "trace");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["eps"], "1/1048576");
    assert!(v["timing_ms"].is_u64());
    assert_eq!(v["payload"]["value"], "1/6");
}

#[test]
fn interleaved_pair_is_trace_equivalent() {
    let out = run(&["equiv", &path("trace1_m.prog"), &path("trace1_n.prog"), "--mode", "trace", "--depth", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["payload"]["verdict"], "EquivalentUpTo");
}

#[test]
fn distinguished_programs_exit_one() {
    let sig = path("happy.sig");
    let m = scratch("d_m.prog", "req Happy(req Bye, req Bye)");
    let n = scratch("d_n.prog", "req Happy(req Bye, req Bye) +[1/2] req Bye");
    let out = run(&["--sig", &sig, "equiv", m.to_str().unwrap(), n.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["payload"]["verdict"], "Distinguished");
}

#[test]
fn steady_form_needs_a_finitary_signature() {
    let out = run(&["normalize", &path("infexample.prog"), "--form", "steady"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "SignatureNotFinitary");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["trace", &path("happy.prog")]).status.code(), Some(2));
    let bad = run(&["trace", &path("happy.prog"), "--play", "Happy?7"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(run(&["trace", "/nonexistent/x.prog", "--play", "Bye"]).status.code(), Some(2));
    assert_eq!(run(&["--eps", "2", "trace", &path("happy.prog"), "--play", "Bye"]).status.code(), Some(2));
}

#[test]
fn payloads_are_deterministic() {
    let cmds: [&[&str]; 3] = [
        &["sample", &path("happy.prog"), "--n", "20", "--seed", "9"],
        &["play", &path("notwnf.prog"), "--cs", &path("notwnf.cs"), "--n", "50", "--max-steps", "4"],
        &["normalize", &path("notwnf.prog"), "--form", "light"],
    ];
    for args in cmds {
        let a = json(&run(args));
        let b = json(&run(args));
        assert_eq!(a["payload"], b["payload"], "{args:?}");
    }
}

#[test]
fn config_file_sits_below_flags() {
    let cfg = scratch("c.toml", "depth = 3\neps = 2^-10\n");
    let c = cfg.to_str().unwrap();
    let v = json(&run(&["--config", c, "trace", &path("happy.prog"), "--play", "Bye"]));
    assert_eq!(v["config"]["depth"], 3);
    assert_eq!(v["config"]["eps"], "1/1024");
    let v = json(&run(&["--config", c, "--depth", "5", "trace", &path("happy.prog"), "--play", "Bye"]));
    assert_eq!(v["config"]["depth"], 5);
    let out = Command::new(env!("CARGO_BIN_EXE_probstrat"))
        .args(["trace", &path("happy.prog"), "--play", "Bye"])
        .env("PROBSTRAT_CONFIG", c)
        .output()
        .unwrap();
    assert_eq!(json(&out)["config"]["depth"], 3);
}

#[test]
fn subsplit_and_victorious() {
    let out = run(&["subsplit", &path("notwnf.prog"), &path("notwnf_one.prog"), "--p", "1/4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["payload"]["check"]["verdict"], "EquivalentUpTo");
    let out = run(&["victorious", &path("happy.prog"), "--steps", "4", "--cs", &path("happy.cs")]);
    assert_eq!(out.status.code(), Some(0));
    let p = &json(&out)["payload"];
    assert_eq!(p["given"][4], "0/1");
    assert_eq!(p["syntactic_certificate"], true);
}

#[test]
fn selftest_runs_one_criterion() {
    let out = run(&["selftest", "--only", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
