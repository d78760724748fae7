mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;

fn mei(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mei"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_accepts_bundled_networks() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["desk.inp", "mixing.inp", "zones.inp"] {
        let o = mei(&["validate", &path(name)], tmp.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
}

#[test]
fn validate_rejects_broken_network() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.inp");
    let text = std::fs::read_to_string(data("mixing.inp")).unwrap().replace("L6    J2     J3", "L6    J2     J2");
    std::fs::write(&bad, text).unwrap();
    let o = mei(&["validate", bad.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn simulate_writes_hydraulic_states() {
    let tmp = tempfile::tempdir().unwrap();
    let schedule = tmp.path().join("s.txt");
    std::fs::write(&schedule, desk_good_schedule().to_string()).unwrap();
    let o = mei(
        &[
            "simulate",
            "--network",
            &path("desk.inp"),
            "--scenario",
            &path("desk_scenario.txt"),
            "--schedule",
            schedule.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(tmp.path().join("hydraulics.csv")).unwrap();
    assert!(text.lines().count() > 24);
}

#[test]
fn mei_with_schedule_writes_a_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let schedule = tmp.path().join("s.txt");
    std::fs::write(&schedule, desk_good_schedule().to_string()).unwrap();
    let o = mei(
        &["mei", &path("desk.inp"), &path("desk_scenario.txt"), "--schedule", schedule.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["schedule.txt", "hydraulics.csv", "mei_hourly.csv", "mei_daily.csv", "cdf.csv", "summary.json"] {
        assert!(tmp.path().join("base").join(f).exists(), "{f}");
    }
}

#[test]
fn optimize_honours_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mei(
        &[
            "--generations",
            "2",
            "--population",
            "8",
            "--seed",
            "5",
            "optimize",
            &path("desk.inp"),
            &path("desk_scenario.txt"),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let history = std::fs::read_to_string(tmp.path().join("base/fitness_history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3);
}

#[test]
fn schedule_with_wrong_pump_count_is_invalid_input() {
    let tmp = tempfile::tempdir().unwrap();
    let schedule = tmp.path().join("s.txt");
    std::fs::write(&schedule, "111111111111111111111111\n").unwrap();
    let o = mei(
        &["mei", &path("desk.inp"), &path("desk_scenario.txt"), "--schedule", schedule.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn missing_inputs_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(mei(&["optimize", &path("desk.inp")], tmp.path()).status.code(), Some(2));
    assert_eq!(mei(&["frobnicate"], tmp.path()).status.code(), Some(2));
    let o = mei(&["validate", "/nonexistent/net.inp"], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}
