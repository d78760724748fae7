//! Optimizes the desk scenario and its standard variants, then prints how
//! the daily MEI distribution moves relative to the base.
//!
//! Usage: `cargo run --release --example sensitivity_sweep [generations]`

use mei::runner::{distribution_stats, run_sweep, standard_variants, RunOptions};
use mei::scenario::parse_scenario;
use mei::inp::parse_inp;

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let net = parse_inp(&std::fs::read_to_string(format!("{dir}/desk.inp"))?)?.network;
    let mut spec = parse_scenario(&std::fs::read_to_string(format!("{dir}/desk_scenario.txt"))?)?;
    spec.ga.generations = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => 20,
    };

    let variants = standard_variants(&net, &spec)?;
    let sweep = run_sweep(&net, &spec, &variants, &RunOptions::default())?;
    let base_mean = sweep.base.summary.mean_daily_mei.unwrap_or(f64::NAN);
    println!("{:>6} {:>9} {:>9} {:>9} {:>8}", "name", "mean", "min", "max", "shift%");
    println!(
        "{:>6} {:>9.4} {:>9.4} {:>9.4} {:>8}",
        "base",
        base_mean,
        sweep.base.summary.min_daily_mei.unwrap_or(f64::NAN),
        sweep.base.summary.max_daily_mei.unwrap_or(f64::NAN),
        "-"
    );
    for entry in &sweep.variants {
        match &entry.outcome {
            Ok(run) => {
                let (mean, min, max) = distribution_stats(&run.daily.nodes);
                let mean = mean.unwrap_or(f64::NAN);
                println!(
                    "{:>6} {:>9.4} {:>9.4} {:>9.4} {:>8.2}",
                    entry.variant.name,
                    mean,
                    min.unwrap_or(f64::NAN),
                    max.unwrap_or(f64::NAN),
                    100.0 * (mean - base_mean) / base_mean
                );
            }
            Err(e) => println!("{:>6} failed: {e}", entry.variant.name),
        }
    }
    Ok(())
}
