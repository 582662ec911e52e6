//! The `namo` binary end to end: exit codes, output files, config layering.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use namo_core::benchmark::Trace;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn namo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_namo"))
        .args(args)
        .env_remove("NAMO_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn empty_room(dir: &Path) -> PathBuf {
    let p = dir.join("empty.json");
    let text = r#"{"version":1,"seed":0,"room":{"length":8.0,"width":4.0},
        "start":{"x":0.5,"y":2.0},"goal":{"x":7.5,"y":2.0},"obstacles":[]}"#;
    fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn empty_room_plans_a_straight_line() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = empty_room(dir.path());
    let out = dir.path().join("plan");
    let o = namo(&[
        "plan",
        "--scenario",
        scenario.to_str().unwrap(),
        "--planner",
        "svg",
        "--out",
        out.to_str().unwrap(),
        "--render",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = read_json(&out.join("graph.json"));
    assert_eq!(g["graph"]["nodes"].as_array().unwrap().len(), 2);
    assert_eq!(g["route"].as_array().unwrap().len(), 2);
    // 7 m at 0.5 m spacing
    let csv = fs::read_to_string(out.join("waypoints.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 15);
    assert!(fs::read_to_string(out.join("plan.svg"))
        .unwrap()
        .starts_with("<svg"));
    for f in ["config.toml", "scenario.json", "timing.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn plan_exit_codes_follow_reachability() {
    let dir = tempfile::tempdir().unwrap();
    let corridors = fixture("two_corridors.json");
    let run = |planner: &str| {
        let out = dir.path().join(planner);
        namo(&[
            "plan",
            "--scenario",
            corridors.to_str().unwrap(),
            "--planner",
            planner,
            "--out",
            out.to_str().unwrap(),
        ])
    };
    // both gaps are narrower than the robot, so only pushing gets through
    assert_eq!(code(&run("nvg")), 2);
    assert_eq!(code(&run("svg")), 0);
    assert_eq!(code(&run("bvg")), 0);
    // a failed plan still leaves the graph for inspection
    let g = read_json(&dir.path().join("nvg/graph.json"));
    assert_eq!(g["path_found"], false);
    assert!(g["graph"]["nodes"].as_array().unwrap().len() >= 2);
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\"version\": 1, \"room\": ").unwrap();
    let future = dir.path().join("future.json");
    let mut v = read_json(&fixture("two_corridors.json"));
    v["version"] = 99.into();
    fs::write(&future, v.to_string()).unwrap();

    for args in [
        vec!["plan", "--scenario", broken.to_str().unwrap(), "--out", out],
        vec!["plan", "--scenario", future.to_str().unwrap(), "--out", out],
        vec!["plan", "--scenario", "/nonexistent/s.json", "--out", out],
        vec!["plan", "--seed", "1", "--planner", "prm", "--out", out],
        vec!["plan", "--seed", "1", "--set", "mppi.K=1", "--out", out],
        vec!["plan", "--out", out],
        vec!["bench", "--seeds", "3..1", "--out", out],
        vec!["render", "/nonexistent/trace.jsonl", "--out", out],
        vec!["frobnicate"],
    ] {
        let o = namo(&args);
        assert_eq!(code(&o), 1, "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(code(&namo(&["--help"])), 0);
}

#[test]
fn config_file_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "planner = \"nvg\"\n[mppi]\nK = 16\n").unwrap();
    let out = dir.path().join("o");
    let corridors = fixture("two_corridors.json");
    let o = Command::new(env!("CARGO_BIN_EXE_namo"))
        .args([
            "plan",
            "--scenario",
            corridors.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .env("NAMO_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let written = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(written.contains("K = 16"), "{written}");
    // an explicit flag beats the environment
    let o = Command::new(env!("CARGO_BIN_EXE_namo"))
        .args([
            "plan",
            "--scenario",
            corridors.to_str().unwrap(),
            "--planner",
            "svg",
        ])
        .args(["--out", out.to_str().unwrap()])
        .env("NAMO_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn simulate_writes_a_consistent_trace() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = empty_room(dir.path());
    let out = dir.path().join("sim");
    let o = namo(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--set",
        "mppi.K=32",
        "--out",
        out.to_str().unwrap(),
        "--render",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let result = read_json(&out.join("result.json"));
    assert_eq!(result["outcome"], "reached");
    let trace = Trace::parse(&fs::read_to_string(out.join("trace.jsonl")).unwrap()).unwrap();
    assert_eq!(
        trace.records.len() as u64,
        result["cycles"].as_u64().unwrap()
    );
    assert_eq!(trace.header.scenario.start.x, 0.5);
    let last = trace.records.last().unwrap().pose;
    assert!(last.position().dist(trace.header.scenario.goal) <= 0.2);
    // nothing to touch in an empty room
    assert_eq!(trace.cumulative_force(0.08), 0.0);
    assert_eq!(result["cumulative_force"].as_f64().unwrap(), 0.0);

    let svg = dir.path().join("again.svg");
    let o = namo(&[
        "render",
        out.join("trace.jsonl").to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(&svg).unwrap(),
        fs::read(out.join("trace.svg")).unwrap()
    );
}
