//! Marginal energy intensity of drinking water distribution.
//!
//! The crate models a pressurized distribution network, simulates it over a
//! 24-hour horizon under a pump on/off schedule, optimizes that schedule
//! with a genetic algorithm and traces the energy embedded in the water
//! delivered to each node back to its sources.

pub mod backtrack;
pub mod ga;
pub mod hydraulics;
pub mod inp;
pub mod network;
pub mod rng;
pub mod runner;
pub mod scenario;
pub mod schedule;
pub mod units;

pub use network::{validate_network, Network};
pub use schedule::PumpSchedule;
