//! Simulates the desk network for one day under a fixed schedule and prints
//! tank levels, pump operation and energy per hour.

use mei::hydraulics::{simulate_eps, SimOptions};
use mei::inp::parse_inp;
use mei::scenario::{apply_scenario, parse_scenario};
use mei::PumpSchedule;

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let parsed = parse_inp(&std::fs::read_to_string(format!("{dir}/desk.inp"))?)?;
    let spec = parse_scenario(&std::fs::read_to_string(format!("{dir}/desk_scenario.txt"))?)?;
    let net = apply_scenario(&parsed.network, &spec)?;

    let pattern = std::env::args().nth(1).unwrap_or_else(|| "1".repeat(24));
    let rows = vec![pattern.clone(); net.pumps.len()].join("\n");
    let schedule: PumpSchedule = rows.parse()?;
    let sim = simulate_eps(&net, &schedule, &SimOptions::default())?;

    println!("feasible: {} {:?}", sim.feasible, sim.infeasibility_reason);
    for st in &sim.states {
        let pumps: Vec<String> = st
            .pumps
            .iter()
            .map(|p| format!("{:6.1}m3/h {:5.1}m {:4.2}", p.flow, p.head_gain, p.efficiency))
            .collect();
        println!(
            "h{:02} t={:5.2} dur={:4.2} levels={:?} pmin={:6.2} pumps=[{}]",
            st.hour,
            st.start,
            st.duration,
            st.tank_levels.iter().map(|l| (l * 100.0).round() / 100.0).collect::<Vec<_>>(),
            st.min_consumer_pressure,
            pumps.join(", ")
        );
    }
    println!("energy {:.2} kWh, injected fractions {:?}", sim.total_energy(), sim.injected_fractions());
    Ok(())
}
