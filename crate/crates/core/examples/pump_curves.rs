//! Reconstructs pump curves from a best-efficiency point and tabulates head,
//! efficiency and shaft power across the operating range.
//!
//! Usage: `cargo run --example pump_curves [flow_m3h head_m efficiency]`

use mei::hydraulics::pump_power;
use mei::network::reconstruct_pump_curves;

fn main() -> anyhow::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    let (q, h, eta) = match args.as_slice() {
        [q, h, e] => (*q, *h, *e),
        [] => (150.0, 40.0, 0.75),
        _ => anyhow::bail!("expected flow, head and efficiency"),
    };
    let curves = reconstruct_pump_curves(q, h, eta)?;
    println!("shutoff head {:.2} m, runout flow {:.1} m3/h", curves.shutoff_head(), curves.runout_flow());
    println!("{:>8} {:>8} {:>6} {:>8}", "Q", "H", "eta", "kW");
    for i in 0..=10 {
        let flow = curves.runout_flow() * i as f64 / 10.0;
        let head = curves.head_at(flow);
        let eff = curves.efficiency_at(flow);
        let kw = pump_power(flow, head, eff)?;
        println!("{flow:>8.1} {head:>8.2} {eff:>6.3} {kw:>8.2}");
    }
    Ok(())
}
