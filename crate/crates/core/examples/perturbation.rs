//! Perturbs the demand of randomly chosen consumers on an optimized desk run
//! and reports how far the hourly MEI values move at each level.
//!
//! Usage: `cargo run --release --example perturbation [generations]`

use mei::inp::parse_inp;
use mei::runner::{run_perturbation, run_scenario, RunOptions};
use mei::scenario::parse_scenario;

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let net = parse_inp(&std::fs::read_to_string(format!("{dir}/desk.inp"))?)?.network;
    let mut spec = parse_scenario(&std::fs::read_to_string(format!("{dir}/desk_scenario.txt"))?)?;
    spec.ga.generations = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => 20,
    };
    let perturbation = spec.perturbation.clone().unwrap_or_default();

    let base = run_scenario(&net, &spec, &RunOptions::default())?;
    let table = run_perturbation(&base, &perturbation, spec.seed, &RunOptions::default());
    println!("{:>6} {:>14} {:>14} {:>9}", "level", "median max |d|", "max |d| %", "failures");
    for &level in &perturbation.levels {
        println!(
            "{:>6.2} {:>14.5} {:>14.3} {:>9}",
            level,
            table.median_max_delta(level).unwrap_or(f64::NAN),
            table.max_pct_any_node(level),
            table.runs.iter().filter(|r| r.level == level && r.failure.is_some()).count()
        );
    }
    Ok(())
}
