//! Schedule fitness: normalized electricity cost plus tank, pressure and
//! source-share penalties.

use serde::Serialize;
use thiserror::Error;

use crate::hydraulics::SimulationResult;
use crate::network::{Network, PriceSeries, HORIZON_HOURS};
use crate::scenario::GaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitnessBreakdown {
    pub total: f64,
    pub c_elec: f64,
    pub p_tank: f64,
    pub p_pressure: f64,
    pub p_fraction: f64,
}

impl FitnessBreakdown {
    pub fn new(c_elec: f64, p_tank: f64, p_pressure: f64, p_fraction: f64) -> Self {
        Self {
            total: c_elec + p_tank + p_pressure + p_fraction,
            c_elec,
            p_tank,
            p_pressure,
            p_fraction,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FitnessError {
    #[error("price series '{id}' has {found} values, expected {HORIZON_HOURS}")]
    PriceLength { id: String, found: usize },
    #[error("price series '{0}' sums to zero and cannot normalize the cost")]
    ZeroPriceSum(String),
    #[error("simulation covers {found} hours of energy data, expected {HORIZON_HOURS}")]
    EnergyLength { found: usize },
}

/// Electricity cost normalized by the mean price:
/// `24 / sum(c) * sum_t E_t c_t`, with prices indexed by clock hour.
pub fn electricity_cost(energy: &[f64], prices: &PriceSeries, start_hour: usize) -> Result<f64, FitnessError> {
    if prices.prices.len() != HORIZON_HOURS {
        return Err(FitnessError::PriceLength {
            id: prices.id.clone(),
            found: prices.prices.len(),
        });
    }
    if energy.len() != HORIZON_HOURS {
        return Err(FitnessError::EnergyLength { found: energy.len() });
    }
    let sum: f64 = prices.prices.iter().sum();
    if sum == 0.0 {
        return Err(FitnessError::ZeroPriceSum(prices.id.clone()));
    }
    let cost: f64 = energy
        .iter()
        .enumerate()
        .map(|(t, e)| e * prices.prices[(start_hour + t) % HORIZON_HOURS])
        .sum();
    Ok(HORIZON_HOURS as f64 / sum * cost)
}

/// Penalty for one tank whose level changed by `delta` over a range of
/// `range` metres.
pub fn tank_penalty(delta: f64, range: f64, offset: f64) -> f64 {
    ((delta / range + offset) * 100.0).powi(2)
}

/// Penalty on the lowest delivered pressure head.
pub fn pressure_penalty(p_low: f64, cfg: &GaConfig) -> f64 {
    let d = cfg.min_pressure_m - p_low;
    let d = if cfg.literal_pressure_penalty { d } else { d.max(0.0) };
    d * d * cfg.pressure_weight
}

/// Penalty for one source whose delivered share misses its target.
pub fn fraction_penalty(actual: f64, target: f64, tolerance: f64, weight: f64) -> f64 {
    let d = actual - target;
    if d.abs() > tolerance {
        weight * d * d
    } else {
        0.0
    }
}

/// Fitness of a feasible simulation.
pub fn fitness(
    sim: &SimulationResult,
    prices: &PriceSeries,
    net: &Network,
    cfg: &GaConfig,
) -> Result<FitnessBreakdown, FitnessError> {
    let c_elec = electricity_cost(&sim.energy_per_step, prices, net.horizon_start_hour)?;
    let p_tank = net
        .tanks
        .values()
        .enumerate()
        .map(|(i, t)| tank_penalty(sim.final_levels[i] - sim.initial_levels[i], t.level_range(), cfg.tank_offset))
        .sum();
    let p_pressure = if sim.p_low.is_finite() {
        pressure_penalty(sim.p_low, cfg)
    } else {
        0.0
    };
    let p_fraction = sim
        .injected_fractions()
        .iter()
        .zip(net.reservoirs.values())
        .map(|(a, r)| fraction_penalty(*a, r.target_fraction, cfg.fraction_tolerance, cfg.fraction_weight))
        .sum();
    Ok(FitnessBreakdown::new(c_elec, p_tank, p_pressure, p_fraction))
}
