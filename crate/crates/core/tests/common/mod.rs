#![allow(dead_code)]

use std::path::PathBuf;

use mei::inp::parse_inp;
use mei::scenario::{apply_scenario, parse_scenario, ScenarioSpec};
use mei::{Network, PumpSchedule};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn network(name: &str) -> Network {
    let text = std::fs::read_to_string(data(name)).unwrap();
    parse_inp(&text).unwrap().network
}

pub fn desk_spec() -> ScenarioSpec {
    parse_scenario(&std::fs::read_to_string(data("desk_scenario.txt")).unwrap()).unwrap()
}

/// Desk network with the base scenario applied.
pub fn desk() -> Network {
    apply_scenario(&network("desk.inp"), &desk_spec()).unwrap()
}

pub fn uniform_schedule(n_pumps: usize, pattern: &str) -> PumpSchedule {
    vec![pattern; n_pumps].join("\n").parse().unwrap()
}

/// A feasible desk schedule found by an earlier optimization run.
pub fn desk_good_schedule() -> PumpSchedule {
    "100111110001001000000000\n011000000111010100000111\n000110000010111100000101"
        .parse()
        .unwrap()
}

/// Alternating pump operation for the mixing network.
pub const MIXING_PATTERN: &str = "111111000000111111001100";
