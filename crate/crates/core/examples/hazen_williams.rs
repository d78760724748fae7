//! Prints Hazen-Williams head losses over a grid of flows and roughness
//! coefficients for a 1 km pipe.
//!
//! Usage: `cargo run --example hazen_williams [diameter_m]`

use mei::hydraulics::hazen_williams_headloss;

fn main() -> anyhow::Result<()> {
    let d: f64 = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => 0.3,
    };
    let roughness = [80.0, 100.0, 120.0, 140.0];
    print!("{:>10}", "Q m3/h");
    for c in roughness {
        print!("{:>12}", format!("C={c}"));
    }
    println!();
    for q_m3h in [25.0, 50.0, 100.0, 200.0, 400.0] {
        print!("{q_m3h:>10.0}");
        for c in roughness {
            let h = hazen_williams_headloss(1000.0, q_m3h / 3600.0, d, c);
            print!("{h:>12.3}");
        }
        println!();
    }
    Ok(())
}
