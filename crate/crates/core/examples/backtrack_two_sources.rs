//! Backtracks the two-source mixing network and shows, for one hour, how each
//! consumer's MEI splits between the sources that feed it.
//!
//! Usage: `cargo run --example backtrack_two_sources [hour]`

use mei::backtrack::{backtrack, BacktrackOptions};
use mei::hydraulics::{simulate_eps, SimOptions};
use mei::inp::parse_inp;
use mei::PumpSchedule;

fn main() -> anyhow::Result<()> {
    let hour: usize = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => 2,
    };
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/mixing.inp");
    let mut net = parse_inp(&std::fs::read_to_string(path)?)?.network;
    // a cheap and an expensive source
    for (r, (transmission, treatment)) in net.reservoirs.values_mut().zip([(0.25, 0.15), (0.8, 0.25)]) {
        r.transmission_ei = transmission;
        r.treatment_ei = treatment;
    }
    let schedule: PumpSchedule = "111111000000111111001100".parse()?;
    let sim = simulate_eps(&net, &schedule, &SimOptions::default())?;
    let report = backtrack(&net, &sim, &BacktrackOptions::default())?;

    let step = report
        .steps
        .iter()
        .find(|s| s.hour == hour)
        .ok_or_else(|| anyhow::anyhow!("no step in hour {hour}"))?;
    println!("hour {hour}, pump {}", if schedule.get(0, hour) { "on" } else { "off" });
    for (j, node) in step.nodes.iter().enumerate().take(report.layout.n_junctions) {
        let Some(m) = node else { continue };
        let shares: Vec<String> = m
            .shares
            .iter()
            .map(|s| {
                format!(
                    "{} {:.0}% ({:.3}+{:.3})",
                    report.source_ids[s.source],
                    100.0 * s.fraction,
                    s.pre_injection,
                    s.distribution
                )
            })
            .collect();
        println!(
            "{:>4}: MEI {:.4} = pre {:.4} + dist {:.4}   [{}]",
            report.layout.node_ids[j],
            m.total,
            m.pre_injection,
            m.distribution,
            shares.join(", ")
        );
    }
    Ok(())
}
