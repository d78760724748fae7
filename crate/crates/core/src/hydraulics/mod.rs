//! Demand-driven extended-period hydraulic simulation.

pub mod bep;
pub mod eps;
pub mod headloss;
pub mod model;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use bep::{apply_bep_curves, estimate_bep, BepError, BepEstimate, BepSampling};
pub use eps::{simulate_eps, SimOptions, Simulator, TankStep};
pub use headloss::{hazen_williams_headloss, pump_power};
pub use model::{Allowed, HydraulicModel, Layout, LinkState, StepInput, StepSolution};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StepFailure {
    #[error("network solve did not converge in {iterations} iterations (head residual {worst_head:e} m, mass residual {worst_mass:e} m3/h)")]
    NonConvergence {
        iterations: usize,
        worst_head: f64,
        worst_mass: f64,
    },
    #[error("junction {node} has demand but is disconnected from every source")]
    Disconnected { node: String },
    #[error("link statuses keep switching without settling")]
    StatusCycling,
    #[error("singular network Jacobian")]
    Singular,
    #[error("tank levels did not converge within {iterations} outer iterations")]
    TankNonConvergence { iterations: usize },
    #[error("invalid network: {detail}")]
    InvalidNetwork { detail: String },
}

/// Operating point of one pump during one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpOperation {
    pub on: bool,
    /// m³/h
    pub flow: f64,
    /// m
    pub head_gain: f64,
    pub efficiency: f64,
    /// kW
    pub power: f64,
}

/// Converged hydraulic state of one simulation period.
///
/// Vectors follow the canonical [`Layout`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct HydraulicState {
    /// Period index within the run.
    pub time_index: usize,
    /// Horizon hour the period belongs to.
    pub hour: usize,
    /// Start time from the beginning of the horizon, h.
    pub start: f64,
    /// h
    pub duration: f64,
    /// m³/h, positive from -> to.
    pub link_flows: Vec<f64>,
    pub link_states: Vec<LinkState>,
    /// m
    pub node_heads: Vec<f64>,
    /// Junction demand in m³/h, zero at other nodes.
    pub node_demands: Vec<f64>,
    pub pumps: Vec<PumpOperation>,
    /// Levels at the end of the period, m.
    pub tank_levels: Vec<f64>,
    /// Net inflow into each tank, m³/h.
    pub tank_net_inflow: Vec<f64>,
    /// Net outflow from each reservoir, m³/h.
    pub reservoir_outflow: Vec<f64>,
    /// Lowest pressure head at a junction drawing water, m.
    pub min_consumer_pressure: f64,
}

impl HydraulicState {
    pub fn pressure(&self, layout: &Layout, node: usize) -> f64 {
        self.node_heads[node] - layout.elevations[node]
    }

    /// Pump shaft energy spent during the period, kWh.
    pub fn pump_energy(&self) -> f64 {
        self.pumps.iter().map(|p| p.power).sum::<f64>() * self.duration
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub layout: Arc<Layout>,
    pub states: Vec<HydraulicState>,
    pub feasible: bool,
    pub infeasibility_reason: Option<String>,
    pub warnings: Vec<String>,
    /// Lowest consumer pressure over the run, m.
    pub p_low: f64,
    /// Pump energy per horizon hour, kWh.
    pub energy_per_step: Vec<f64>,
    /// Net volume injected by each reservoir, m³.
    pub injected_volume: Vec<f64>,
    pub initial_levels: Vec<f64>,
    pub final_levels: Vec<f64>,
    /// Hours simulated before the run ended.
    pub simulated_hours: f64,
}

impl SimulationResult {
    pub fn total_energy(&self) -> f64 {
        self.energy_per_step.iter().sum()
    }

    /// Share of the injected volume delivered by each reservoir.
    pub fn injected_fractions(&self) -> Vec<f64> {
        let total: f64 = self.injected_volume.iter().sum();
        self.injected_volume
            .iter()
            .map(|v| if total > 0.0 { v / total } else { 0.0 })
            .collect()
    }

    /// States belonging to horizon hour `hour`.
    pub fn hour_states(&self, hour: usize) -> impl Iterator<Item = &HydraulicState> {
        self.states.iter().filter(move |s| s.hour == hour)
    }

    /// Net volume each tank received over the run, m³ (negative when it
    /// released more than it stored).
    pub fn tank_net_volume(&self, areas: &[f64]) -> Vec<f64> {
        self.final_levels
            .iter()
            .zip(&self.initial_levels)
            .zip(areas)
            .map(|((f, i), a)| (f - i) * a)
            .collect()
    }
}
