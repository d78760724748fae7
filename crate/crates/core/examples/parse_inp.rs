//! Parses an INP file, reports its elements and any validation problems, and
//! prints the normalized text the library writes back.
//!
//! Usage: `cargo run --example parse_inp [file.inp]`

use mei::inp::{emit_inp, parse_inp_unvalidated};
use mei::validate_network;

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/mixing.inp").to_string());
    let parsed = parse_inp_unvalidated(&std::fs::read_to_string(&path)?)?;
    let net = &parsed.network;
    println!(
        "{path}: {} junctions, {} reservoirs, {} tanks, {} pipes, {} pumps, {} valves",
        net.junctions.len(),
        net.reservoirs.len(),
        net.tanks.len(),
        net.pipes.len(),
        net.pumps.len(),
        net.valves.len()
    );
    for w in &parsed.warnings {
        println!("warning: {w}");
    }
    let violations = validate_network(net);
    for v in &violations {
        println!("invalid: {v}");
    }
    if violations.is_empty() {
        println!("\n{}", emit_inp(net));
    }
    Ok(())
}
