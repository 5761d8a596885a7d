use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_meandim"))
}

fn run(args: &[&str]) -> (i32, Value, Output) {
    let out = bin().args(args).output().expect("spawn meandim");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    });
    (out.status.code().unwrap_or(-1), v, out)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("meandim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> String {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn blocksys_build_half() {
    let (code, v, _) = run(&["blocksys", "build", "--r", "1/2", "--stages", "2", "--alphabet", "2", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], "meandim/1");
    assert_eq!(v["status"], "ok");
    assert_eq!(v["seed"], 7);
    let r = &v["result"];
    assert_eq!(r["a"], serde_json::json!([1]));
    assert_eq!(r["lower_bound"], "1/2");
    assert_eq!(r["stages"][1]["free_dim_ratio"], "1/2");
}

#[test]
fn bounds_read_a_saved_report() {
    let (_, _, out) = run(&["blocksys", "build", "--r", "1/3", "--stages", "3"]);
    let path = write("b13.json", &String::from_utf8(out.stdout).unwrap());
    let (code, v, _) = run(&["blocksys", "bounds", &path, "--k", "1,1000"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["lower_bound"], "1/3");
    assert_eq!(v["result"]["upper_bound_limit"], "1/3");
    assert!(v["assertions"].as_array().unwrap().iter().all(|a| a["passed"] == true));
}

#[test]
fn missing_file_is_an_input_error() {
    let (code, v, out) = run(&["cover", "order", "missing.json"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["message"], "file not found");
    assert_eq!(v["error"]["path"], "missing.json");
    assert!(String::from_utf8_lossy(&out.stderr).contains("file not found"));
}

#[test]
fn malformed_json_names_the_file() {
    let path = write("bad.json", "{\"ground\": [");
    let (code, v, _) = run(&["cover", "order", &path]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "malformed_json");
    assert_eq!(v["error"]["path"], path.as_str());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let (code, v, _) = run(&["cover", "frobnicate"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "usage");
}

#[test]
fn exhaustive_interval() {
    let (code, v, _) = run(&["cube", "exhaustive", "--n", "1", "--grid", "4", "--max-sets", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["min_order"], 1);
}

#[test]
fn verify_rejects_zero_trials() {
    let cfg = write("zero.conf", "# no trials\ntrials = 0\n");
    let (code, v, _) = run(&["--config", &cfg, "verify", "--only", "6"]);
    assert_eq!(code, 1);
    assert!(v.get("error").is_some());
}

#[test]
fn config_rejects_unknown_keys() {
    let cfg = write("unknown.conf", "colour = blue\n");
    let (code, v, _) = run(&["--config", &cfg, "cube", "exhaustive", "--n", "1", "--grid", "2", "--max-sets", "2"]);
    assert_eq!(code, 1);
    assert!(v["error"]["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["embed", "sphere-demo", "--samples", "20", "--seed", "11"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_adds_elapsed() {
    let (_, plain, _) = run(&["dynsys", "indices", "--n", "2"]);
    let (_, timed, _) = run(&["--timing", "dynsys", "indices", "--n", "2"]);
    assert!(plain.get("elapsed_s").is_none());
    assert!(timed["elapsed_s"].is_number());
}

#[test]
fn random_system_round_trips() {
    let (code, v, _) = run(&["dynsys", "random", "--lengths", "4,5,6", "--seed", "9"]);
    assert_eq!(code, 0);
    let path = write("sys.json", &serde_json::to_string(&v["result"]).unwrap());
    let (code, m, _) = run(&["dynsys", "marker", &path, "--n", "4"]);
    assert_eq!(code, 0);
    assert_eq!(m["result"]["is_marker"], true);
    let (code, r, _) = run(&["dynsys", "rokhlin", &path, "--n", "4"]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "ok");
}

#[test]
fn out_flag_writes_the_report() {
    let dest = scratch("brick.json");
    let out = bin()
        .args(["cube", "brick", "--n", "2", "--eps", "1/2", "--out", &dest.display().to_string()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(saved["result"]["order"], 2);
    let (code, v, _) = run(&["cube", "order", &dest.display().to_string()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["order"], 2);
}

#[test]
fn failing_assertion_exits_two() {
    // Two fixed points with the same value cannot be told apart by any window.
    let path = write("window.json", r#"{"T": [0, 1], "f": [["1/2"], ["1/2"]], "pairs": [[0, 1]]}"#);
    let (code, v, out) = run(&["embed", "window", &path, "--lo", "-2", "--hi", "2"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "assertion_failed");
    assert_eq!(v["result"]["separating_index"], serde_json::json!([null]));
    assert!(String::from_utf8_lossy(&out.stderr).contains("assertion failed"));
}

#[test]
fn window_separates_a_rotation() {
    let path = write("rot.json", r#"{"T": [1, 2, 0], "f": [["0"], ["1/2"], ["1"]], "pairs": [[0, 1], [1, 2]]}"#);
    let (code, v, _) = run(&["embed", "window", &path, "--lo", "-1", "--hi", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["separating_index"], serde_json::json!([-1, -1]));
}
