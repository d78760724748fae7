//! Daily MEI against node elevation on a network with a pressure-reduced
//! low zone and a boosted high zone.
//!
//! Usage: `cargo run --example elevation_report [network.inp] [schedule-pattern]`

use mei::backtrack::{backtrack, daily_average_mei, BacktrackOptions};
use mei::hydraulics::{simulate_eps, SimOptions};
use mei::inp::parse_inp;
use mei::PumpSchedule;

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/zones.inp").to_string());
    let parsed = parse_inp(&std::fs::read_to_string(&path)?)?;
    let net = parsed.network;
    let pattern = std::env::args().nth(2).unwrap_or_else(|| "1".repeat(24));
    let schedule: PumpSchedule = vec![pattern; net.pumps.len()].join("\n").parse()?;

    let sim = simulate_eps(&net, &schedule, &SimOptions::default())?;
    if let Some(r) = &sim.infeasibility_reason {
        println!("warning: {r}");
    }
    let report = backtrack(&net, &sim, &BacktrackOptions::default())?;
    let daily = daily_average_mei(&report);

    let mut rows: Vec<(f64, &str, f64)> = (0..report.layout.n_junctions)
        .filter_map(|j| daily.nodes[j].map(|m| (report.layout.elevations[j], report.layout.node_ids[j].as_str(), m)))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    println!("{:>6} {:>8} {:>10}", "node", "elev_m", "kWh/m3");
    for (elev, id, m) in rows {
        println!("{id:>6} {elev:>8.1} {m:>10.4}");
    }
    Ok(())
}
