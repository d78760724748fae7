//! Backtracks the desk network under a schedule and prints the daily MEI of
//! every consumer together with the energy balance of the run.
//!
//! Usage: `cargo run --example mei_report [schedule-file]`

use mei::backtrack::{backtrack, daily_average_mei, energy_closure, BacktrackOptions};
use mei::hydraulics::{simulate_eps, SimOptions};
use mei::inp::parse_inp;
use mei::scenario::{apply_scenario, parse_scenario};
use mei::PumpSchedule;

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let parsed = parse_inp(&std::fs::read_to_string(format!("{dir}/desk.inp"))?)?;
    let spec = parse_scenario(&std::fs::read_to_string(format!("{dir}/desk_scenario.txt"))?)?;
    let net = apply_scenario(&parsed.network, &spec)?;

    let schedule: PumpSchedule = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?.parse()?,
        None => PumpSchedule::all(net.pumps.len(), true),
    };
    let sim = simulate_eps(&net, &schedule, &SimOptions::default())?;
    if !sim.feasible {
        println!("warning: {}", sim.infeasibility_reason.as_deref().unwrap_or("infeasible run"));
    }
    let report = backtrack(&net, &sim, &BacktrackOptions::default())?;
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for (id, ei) in report.source_ids.iter().zip(&report.source_eis) {
        println!("source {id:>4}: {:.4} kWh/m3", ei.total());
    }

    let daily = daily_average_mei(&report);
    println!("\n{:>6} {:>9} {:>10} {:>10}", "node", "elev_m", "demand_m3", "kWh/m3");
    for (j, value) in daily.nodes.iter().enumerate() {
        if let Some(v) = value {
            println!(
                "{:>6} {:>9.1} {:>10.1} {:>10.4}",
                report.layout.node_ids[j], report.layout.elevations[j], daily.demand_volume[j], v
            );
        }
    }
    if let Some(s) = daily.system {
        println!("system average: {s:.4} kWh/m3");
    }

    let c = energy_closure(&report, &sim);
    println!("\ndelivered energy   {:10.3} kWh", c.consumed);
    println!("pump energy        {:10.3} kWh", c.pump_energy);
    println!("pre-injection      {:10.3} kWh", c.pre_injection);
    println!("dissipation        {:10.3} kWh", c.dissipation);
    println!("storage net        {:10.3} kWh", c.tank_release - c.tank_charge);
    println!("residual           {:10.3e} (relative {:.3e})", c.residual(), c.relative());
    println!("storage-adjusted   {:10.3e} (relative {:.3e})", c.storage_adjusted(), c.storage_adjusted_relative());
    Ok(())
}
