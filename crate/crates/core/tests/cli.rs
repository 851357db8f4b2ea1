use std::process::{Command, Output};

use serde_json::Value;

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsqrt-forge"))
        .args(args)
        .env_remove("RSQRT_FORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let o = forge(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_ms");
    v
}

#[test]
fn eval_reports_the_counterexample() {
    let o = forge(&["eval", "--x", "0x1.ffffffffffffep-1", "--algo", "newton"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("output=0x1p+0"));
    assert!(out.contains("oracle=0x1.0000000000001p+0"));
    assert!(out.contains("verdict=FaithfulLow ulp=1"));

    let v = json(&["eval", "--x", "0x1.ffffffffffffep-1", "--algo", "halley"]);
    assert_eq!(v["output_hex"], "0x1.0000000000001p+0");
    assert_eq!(v["verdict"], "CorrectlyRounded");
}

#[test]
fn bad_input_exits_with_two() {
    for args in [
        &["eval", "--x", "-1", "--algo", "naive"][..],
        &["eval", "--x", "0", "--algo", "naive"],
        &["eval", "--x", "1", "--algo", "bogus"],
        &["accuracy", "--interval", "2:1", "--samples", "10"],
        &["exhaustive", "--interval", "1:2"],
        &["no-such-command"],
    ] {
        let o = forge(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn accuracy_is_reproducible_and_thread_independent() {
    let args = ["accuracy", "--interval", "1:2", "--samples", "20000", "--algos", "naive,newton", "--seed", "9"];
    let one = without_timing(json(&[&args[..], &["--threads", "1"]].concat()));
    let two = without_timing(json(&[&args[..], &["--threads", "3"]].concat()));
    assert_eq!(one, two);
    assert_eq!(one["rows"][1]["algo"], "newton");
    assert_eq!(one["rows"][1]["zero_ulp"], 20000);
    assert_eq!(one["plan"]["seed"], 9);
    assert_eq!(one["plan"]["prng"], "chacha20-le64seed-stream=index");
}

#[test]
fn plan_file_replays_a_report() {
    let dir = std::env::temp_dir().join(format!("rsqrt-forge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let path_str = path.to_str().unwrap();
    let o = forge(&[
        "accuracy", "--interval", "0.5:1", "--samples", "5000", "--algos", "naive,rcpsqrt331d",
        "--seed", "3", "--format", "json", "--out", path_str,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let replay = json(&["accuracy", "--plan-file", path_str]);
    assert_eq!(without_timing(first), without_timing(replay));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scan_covers_the_whole_family() {
    let v = json(&["scan", "--kmin", "0", "--kmax", "50"]);
    let rows = v["scan"].as_array().unwrap();
    assert_eq!(rows.len(), 102);
    for r in rows {
        let want = if r["algo"] == "newton" { "FaithfulLow" } else { "CorrectlyRounded" };
        assert_eq!(r["verdict"], want, "{r}");
    }
}

#[test]
fn exhaustive_small_interval() {
    let v = json(&["exhaustive", "--precision", "b32", "--interval", "1:1.5"]);
    assert_eq!(v["precision"], "binary32");
    assert_eq!(v["rows"][0]["total"], 1 << 22);
    assert_eq!(v["rows"][0]["two_plus_ulp"], 0);
    assert!(v["nonzero_inputs"].is_array());
}

#[test]
fn csv_and_markdown_layouts() {
    let o = forge(&["accuracy", "--samples", "1000", "--format", "csv"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algo,zero_ulp,one_ulp,two_plus_ulp,unfaithful,total,zero_ulp_pct,one_ulp_pct,two_plus_ulp_pct,worst_x_hex,worst_ulp"
    );
    assert!(lines.next().unwrap().starts_with("naive,"));
    let md = stdout(&forge(&["accuracy", "--samples", "1000"]));
    assert!(md.contains("| Zero ulp |"));
    assert!(md.contains("| Two+ ulp |"));
}

#[test]
fn invariants_and_bench() {
    let v = json(&["invariants", "--interval", "2:4", "--samples", "2000"]);
    for fam in v["invariants"]["families"].as_array().unwrap() {
        assert_eq!(fam["failed"], 0, "{fam}");
    }
    let v = json(&["bench", "--n", "20000", "--reps", "3"]);
    assert!(v["bench"]["ratio_331d_halley_over_331d"].as_f64().unwrap() > 0.0);
    assert_eq!(v["bench"]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn threads_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_rsqrt-forge"))
        .args(["accuracy", "--samples", "100"])
        .env("RSQRT_FORGE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_rsqrt-forge"))
        .args(["accuracy", "--samples", "100"])
        .env("RSQRT_FORGE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
