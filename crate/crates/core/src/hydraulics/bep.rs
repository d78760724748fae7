//! Best-efficiency-point estimation by randomized single-period solves.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eps::{SimOptions, Simulator};
use super::StepFailure;
use crate::network::{reconstruct_pump_curves, CurveError, Network, PumpModel};
use crate::rng::{keyed_rng, purpose};

/// Ranges the operating conditions are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BepSampling {
    /// Global multiplier applied to every base demand.
    pub demand_min: f64,
    pub demand_max: f64,
    /// Tank levels are drawn uniformly from `[min, max]` when true and held
    /// at their initial level otherwise.
    pub randomize_levels: bool,
}

impl Default for BepSampling {
    fn default() -> Self {
        Self {
            demand_min: 0.5,
            demand_max: 1.5,
            randomize_levels: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BepEstimate {
    pub pump_id: String,
    /// Mean operating flow, m³/h.
    pub flow: f64,
    /// Mean head gain, m.
    pub head: f64,
}

#[derive(Debug, Error)]
pub enum BepError {
    #[error("only {found} of {needed} feasible samples after {draws} draws")]
    TooFewFeasible { needed: usize, found: usize, draws: usize },
    #[error("network has no pumps")]
    NoPumps,
    #[error(transparent)]
    Hydraulics(#[from] StepFailure),
    #[error("pump {pump}: {source}")]
    Curve { pump: String, source: CurveError },
}

/// Operating point of every pump in one sample, or `None` when infeasible.
fn draw(sim: &Simulator, net: &Network, seed: u64, index: usize, sampling: &BepSampling) -> Option<Vec<(f64, f64)>> {
    let mut rng = keyed_rng(seed, purpose::BEP, index as u64, 0);
    let lo = sampling.demand_min.min(sampling.demand_max);
    let hi = sampling.demand_max.max(sampling.demand_min);
    let m = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    let levels: Vec<f64> = net
        .tanks
        .values()
        .map(|t| {
            if sampling.randomize_levels && t.max_level > t.min_level {
                rng.gen_range(t.min_level..=t.max_level)
            } else {
                t.init_level
            }
        })
        .collect();
    let demands: Vec<f64> = net.junctions.values().map(|j| j.base_demand * m).collect();
    let on = vec![true; net.pumps.len()];
    let state = sim.snapshot_state(&demands, &on, &levels).ok()?;
    if state.pumps.iter().any(|p| p.flow <= 0.0) || state.min_consumer_pressure < 0.0 {
        return None;
    }
    Some(state.pumps.iter().map(|p| (p.flow, p.head_gain)).collect())
}

/// Mean pump operating points over `n_samples` feasible randomized
/// single-period solves with every pump running. Infeasible draws are
/// discarded; at most `10 * n_samples` draws are made.
pub fn estimate_bep(
    net: &Network,
    n_samples: usize,
    seed: u64,
    sampling: &BepSampling,
) -> Result<Vec<BepEstimate>, BepError> {
    if net.pumps.is_empty() {
        return Err(BepError::NoPumps);
    }
    let sim = Simulator::new(net, SimOptions::default())?;
    let max_draws = 10 * n_samples.max(1);
    let mut accepted: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n_samples);
    let mut next = 0;
    let batch = 64.max(n_samples / 4);
    while accepted.len() < n_samples && next < max_draws {
        let end = (next + batch).min(max_draws);
        let results: Vec<_> = (next..end)
            .into_par_iter()
            .map(|i| draw(&sim, net, seed, i, sampling))
            .collect();
        for r in results.into_iter().flatten() {
            if accepted.len() < n_samples {
                accepted.push(r);
            }
        }
        next = end;
    }
    if accepted.len() < n_samples {
        return Err(BepError::TooFewFeasible {
            needed: n_samples,
            found: accepted.len(),
            draws: next,
        });
    }
    let n = accepted.len() as f64;
    Ok(net
        .pumps
        .keys()
        .enumerate()
        .map(|(i, id)| BepEstimate {
            pump_id: id.clone(),
            flow: accepted.iter().map(|s| s[i].0).sum::<f64>() / n,
            head: accepted.iter().map(|s| s[i].1).sum::<f64>() / n,
        })
        .collect())
}

/// Replaces every pump model with curves reconstructed from `estimates`.
pub fn apply_bep_curves(net: &mut Network, estimates: &[BepEstimate], efficiency: f64) -> Result<(), BepError> {
    for e in estimates {
        let curves = reconstruct_pump_curves(e.flow, e.head, efficiency).map_err(|source| BepError::Curve {
            pump: e.pump_id.clone(),
            source,
        })?;
        if let Some(p) = net.pumps.get_mut(&e.pump_id) {
            p.model = PumpModel::Bep(curves);
        }
    }
    Ok(())
}
