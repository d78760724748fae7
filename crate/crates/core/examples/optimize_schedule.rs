//! Optimizes the desk network's pump schedule with the genetic algorithm
//! and prints the best schedule and its fitness components.
//!
//! Usage: `cargo run --release --example optimize_schedule [seed] [generations]`

use mei::ga::evolve_with;
use mei::inp::parse_inp;
use mei::scenario::{apply_scenario, parse_scenario};

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let net = parse_inp(&std::fs::read_to_string(format!("{dir}/desk.inp"))?)?.network;
    let mut spec = parse_scenario(&std::fs::read_to_string(format!("{dir}/desk_scenario.txt"))?)?;
    let mut args = std::env::args().skip(1);
    if let Some(seed) = args.next() {
        spec.seed = seed.parse()?;
    }
    if let Some(g) = args.next() {
        spec.ga.generations = g.parse()?;
    }
    let net = apply_scenario(&net, &spec)?;
    let prices = spec.active_prices().ok_or_else(|| anyhow::anyhow!("scenario defines no prices"))?;

    let started = std::time::Instant::now();
    let out = evolve_with(&net, prices, &spec.ga, spec.seed, |s| {
        if s.generation % 10 == 0 {
            eprintln!(
                "gen {:4}  best F {:10.3}  c_elec {:9.3}  mean F {:10.3}",
                s.generation, s.best.total, s.best.c_elec, s.mean_total
            );
        }
    })?;
    println!("{}", out.best.schedule);
    println!("{:#?}", out.best.fitness);
    println!("fallback copies: {}", out.fallback_copies);
    println!("elapsed: {:.1?}", started.elapsed());
    Ok(())
}
