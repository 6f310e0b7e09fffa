//! End-to-end runs of the `ptslab` binary. Demo output is pinned by the
//! files in `tests/golden`; set `UPDATE_GOLDEN=1` to rewrite them.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn data(name: &str) -> String {
    manifest().join("tests/data").join(name).display().to_string()
}

fn ptslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptslab")).args(args).env_remove("PTSLAB_FUEL").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = ptslab(&all);
    let v: Value = serde_json::from_str(stdout(&o).trim()).expect("one JSON object");
    for key in ["command", "outcome", "steps", "type"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
    (o.status.code().unwrap(), v)
}

fn golden(name: &str, args: &[&str]) {
    let o = ptslab(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = manifest().join("tests/golden").join(name);
    let got = stdout(&o);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file exists");
    assert!(got == want, "{name} differs from golden output:\n{got}");
}

#[test]
fn demo_loop_matches_golden() {
    golden("demo_loop.txt", &["demo", "loop"]);
}

#[test]
fn demo_hurkens_matches_golden() {
    golden("demo_hurkens.txt", &["demo", "hurkens"]);
}

#[test]
fn demo_flat_matches_golden() {
    golden("demo_flat.txt", &["demo", "flat"]);
}

#[test]
fn normalize_id_at_bool() {
    let o = ptslab(&["normalize", &data("id_bool.ipl"), "--term", "idb"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "\\x:Bool. x\n");
}

#[test]
fn normalize_trace_streams_steps() {
    let o = ptslab(&["normalize", &data("id_bool.ipl"), "--term", "nb", "--trace"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "{text}");
    assert!(lines[0].starts_with("    1. beta at"));
}

#[test]
fn normalize_reports_cycles_and_fuel() {
    let (code, v) = json(&["normalize", &data("loop.ipl"), "--term", "loop", "--cycles"]);
    assert_eq!(code, 0);
    assert_eq!(v["outcome"], "cycle-detected");
    assert_eq!(v["period"], 3);
    assert_eq!(v["type"], "rho");
    let (_, v) = json(&["normalize", &data("loop.ipl"), "--term", "loop", "--fuel", "7"]);
    assert_eq!(v["outcome"], "fuel-exhausted");
    assert_eq!(v["steps"], 7);
}

#[test]
fn fuel_environment_variable_sets_the_default() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ptslab"));
        c.args(["--json", "normalize", &data("loop.ipl"), "--term", "loop"]).args(extra);
        match env {
            Some(v) => c.env("PTSLAB_FUEL", v),
            None => c.env_remove("PTSLAB_FUEL"),
        };
        let v: Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        v["steps"].as_u64().unwrap()
    };
    assert_eq!(run(None, &[]), 10_000);
    assert_eq!(run(Some("12"), &[]), 12);
    assert_eq!(run(Some("12"), &["--fuel", "5"]), 5);
}

#[test]
fn check_succeeds_and_reports_types() {
    let (code, v) = json(&["check", &data("id_bool.ipl")]);
    assert_eq!(code, 0);
    assert_eq!(v["checked"][0]["type"], "Bool -> Bool");
    assert_eq!(v["checked"][1]["type"], "Bool");
}

#[test]
fn check_rejects_forall_in_stlc() {
    let o = ptslab(&["check", &data("stlc_forall.ipl")]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("NoRule") && err.contains(":3:1:"), "{err}");
    let (_, v) = json(&["check", &data("stlc_forall.ipl")]);
    assert_eq!(v["kind"], "NoRule");
}

#[test]
fn system_flag_overrides_the_pragma() {
    let o = ptslab(&["check", &data("stlc_forall.ipl"), "--system", "f"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn io_and_parse_errors_exit_2() {
    assert_eq!(ptslab(&["check", &data("missing.ipl")]).status.code(), Some(2));
    let (code, v) = json(&["check", &data("parse_error.ipl")]);
    assert_eq!(code, 2);
    assert_eq!(v["outcome"], "parse-error");
    assert_eq!(ptslab(&["normalize", &data("id_bool.ipl"), "--term", "nope"]).status.code(), Some(2));
    assert_eq!(ptslab(&["check", &data("id_bool.ipl"), "--system", "coc"]).status.code(), Some(2));
    assert_eq!(ptslab(&["demo", "paradise"]).status.code(), Some(2));
}

#[test]
fn erase_self_application() {
    let o = ptslab(&["erase", &data("id_bool.ipl"), "--term", "SelfID"]);
    assert_eq!(stdout(&o), "(λx.x)(λx.x)\n");
    let (_, v) = json(&["erase", &data("id_bool.ipl"), "--term", "idb"]);
    assert_eq!(v["erasure"], "λx.x");
    assert_eq!(v["type"], "Bool -> Bool");
}

#[test]
fn registry_lists_citations() {
    let (code, v) = json(&["registry"]);
    assert_eq!(code, 0);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), ptslab::encodings::registry().len());
    assert!(entries.iter().all(|e| e["citation"].as_str().is_some_and(|c| !c.is_empty())));
}

#[test]
fn demo_json_summaries() {
    let (code, v) = json(&["demo", "loop"]);
    assert_eq!((code, v["outcome"].as_str()), (0, Some("cycle-detected")));
    assert_eq!(v["witness"], "K {rho} K");
    let (code, v) = json(&["demo", "flat"]);
    assert_eq!((code, v["outcome"].as_str()), (0, Some("convertible")));
    assert_eq!(v["type"], "N -> V");
}
