//! Marginal energy intensity (MEI) by backtracking delivered water to the
//! points where it entered the network.
//!
//! Each converged period is turned into a [`FlowSnapshot`], from which source
//! fractions and accumulated head follow by propagation. Tank intensities are
//! resolved once over the whole horizon, and every node's MEI is the
//! fraction-weighted sum of its sources' pre-injection intensity plus the
//! distribution energy spent along the way.

pub mod propagate;
pub mod snapshot;
pub mod tanks;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::hydraulics::{Layout, SimulationResult};
use crate::network::{LinkKind, Network, HORIZON_HOURS};
use crate::units::head_to_kwh_per_m3;

pub use propagate::{
    propagation_order, solve_fractions, solve_head_accumulation, FractionMatrix, HeadMatrix, PropagationError,
    PropagationOrder,
};
pub use snapshot::{build_flow_snapshot, FlowEdge, FlowSnapshot, DEFAULT_FLOW_EPSILON};
pub use tanks::{resolve_tank_ei, EiParts, TankEnergyState, TankResolveError};

/// Distribution energy intensity of `head` metres, kWh/m³.
pub fn mei_dist(head: f64) -> f64 {
    head_to_kwh_per_m3(head)
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BacktrackError {
    #[error("period {time_index}: node {node} receives water that cannot be traced to any source")]
    Untraceable { time_index: usize, node: String },
    #[error("period {time_index}: flow cycle through {nodes:?} has no source inflow")]
    SingularCycle { time_index: usize, nodes: Vec<String> },
    #[error("tanks {tanks:?} are charged only from one another")]
    TankCycle { tanks: Vec<String> },
    #[error("simulation does not match the network: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacktrackOptions {
    /// m³/h
    pub flow_epsilon: f64,
}

impl Default for BacktrackOptions {
    fn default() -> Self {
        Self {
            flow_epsilon: DEFAULT_FLOW_EPSILON,
        }
    }
}

/// Fractions and accumulated head of one period.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub snapshot: FlowSnapshot,
    /// Whether the flow graph had a directed cycle.
    pub cyclic: bool,
    pub fractions: FractionMatrix,
    pub heads: HeadMatrix,
}

pub fn trace_step(snapshot: FlowSnapshot) -> Result<StepTrace, PropagationError> {
    let order = propagation_order(&snapshot);
    let fractions = solve_fractions(&snapshot, &order)?;
    let heads = solve_head_accumulation(&snapshot, &order, &fractions)?;
    Ok(StepTrace {
        cyclic: matches!(order, PropagationOrder::Cyclic(_)),
        snapshot,
        fractions,
        heads,
    })
}

/// One source's contribution to a node's MEI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceShare {
    pub source: usize,
    pub fraction: f64,
    /// Pre-injection intensity of the source, kWh/m³.
    pub pre_injection: f64,
    /// Distribution intensity from the source to the node, kWh/m³.
    pub distribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMei {
    /// kWh/m³
    pub total: f64,
    pub pre_injection: f64,
    pub distribution: f64,
    /// Split of `total` into transmission, treatment and distribution, with
    /// stored water broken down into the energy it accumulated upstream.
    pub parts: EiParts,
    pub shares: Vec<SourceShare>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepMei {
    pub time_index: usize,
    pub hour: usize,
    pub start: f64,
    pub duration: f64,
    /// `None` where the node has neither inflow nor demand.
    pub nodes: Vec<Option<NodeMei>>,
    /// m³/h
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeiReport {
    pub layout: Arc<Layout>,
    pub source_ids: Vec<String>,
    /// Reservoirs use their configured intensities, tanks the resolved ones.
    pub source_eis: Vec<EiParts>,
    pub tanks: TankEnergyState,
    pub traces: Vec<StepTrace>,
    pub steps: Vec<StepMei>,
    pub warnings: Vec<String>,
}

/// MEI of every node in one traced period.
pub fn assemble_step(trace: &StepTrace, source_eis: &[EiParts]) -> Vec<Option<NodeMei>> {
    let snap = &trace.snapshot;
    (0..snap.n_nodes)
        .map(|j| {
            if let Some(s) = snap.active_source_at(j) {
                let ei = source_eis[s];
                return Some(NodeMei {
                    total: ei.total(),
                    pre_injection: ei.total(),
                    distribution: 0.0,
                    parts: ei,
                    shares: vec![SourceShare {
                        source: s,
                        fraction: 1.0,
                        pre_injection: ei.total(),
                        distribution: 0.0,
                    }],
                });
            }
            if snap.inflow[j] <= 0.0 {
                return None;
            }
            let mut node = NodeMei {
                total: 0.0,
                pre_injection: 0.0,
                distribution: 0.0,
                parts: EiParts::default(),
                shares: Vec::new(),
            };
            for (s, ei) in source_eis.iter().enumerate() {
                let r = trace.fractions.get(s, j);
                if r <= 0.0 {
                    continue;
                }
                let dist = trace.heads.get(s, j).map_or(0.0, mei_dist);
                node.pre_injection += r * ei.total();
                node.distribution += r * dist;
                node.parts.transmission += r * ei.transmission;
                node.parts.treatment += r * ei.treatment;
                node.parts.distribution += r * (ei.distribution + dist);
                node.shares.push(SourceShare {
                    source: s,
                    fraction: r,
                    pre_injection: ei.total(),
                    distribution: dist,
                });
            }
            node.total = node.pre_injection + node.distribution;
            Some(node)
        })
        .collect()
}

/// Runs the full backtracking pipeline over a simulated horizon.
pub fn backtrack(net: &Network, sim: &SimulationResult, opts: &BacktrackOptions) -> Result<MeiReport, BacktrackError> {
    let layout = sim.layout.clone();
    if layout.n_reservoirs != net.reservoirs.len() || layout.n_tanks != net.tanks.len() {
        return Err(BacktrackError::Mismatch(format!(
            "{} reservoirs and {} tanks simulated, network has {} and {}",
            layout.n_reservoirs,
            layout.n_tanks,
            net.reservoirs.len(),
            net.tanks.len()
        )));
    }
    let name = |j: usize| layout.node_ids[j].clone();

    let traces: Vec<StepTrace> = sim
        .states
        .par_iter()
        .map(|state| {
            trace_step(build_flow_snapshot(state, &layout, opts.flow_epsilon)).map_err(|e| match e {
                PropagationError::Untraceable { node } => BacktrackError::Untraceable {
                    time_index: state.time_index,
                    node: name(node),
                },
                PropagationError::SingularCycle { nodes } => BacktrackError::SingularCycle {
                    time_index: state.time_index,
                    nodes: nodes.into_iter().map(name).collect(),
                },
            })
        })
        .collect::<Result<_, _>>()?;

    let reservoir_eis: Vec<(f64, f64)> = net
        .reservoirs
        .values()
        .map(|r| (r.transmission_ei, r.treatment_ei))
        .collect();
    let tanks = resolve_tank_ei(&traces, &reservoir_eis, layout.n_tanks).map_err(|e| match e {
        TankResolveError::Cycle { tanks } => BacktrackError::TankCycle {
            tanks: tanks.into_iter().map(|n| name(layout.tank_node(n))).collect(),
        },
    })?;

    let mut warnings = Vec::new();
    for &n in &tanks.uncharged {
        warnings.push(format!(
            "tank {} never charged during the horizon; its energy intensity is set to 0",
            name(layout.tank_node(n))
        ));
    }
    let source_eis: Vec<EiParts> = reservoir_eis
        .iter()
        .map(|&(transmission, treatment)| EiParts {
            transmission,
            treatment,
            distribution: 0.0,
        })
        .chain(tanks.ei.iter().copied())
        .collect();
    let source_ids: Vec<String> = (0..layout.n_fixed())
        .map(|s| name(layout.n_junctions + s))
        .collect();

    let steps: Vec<StepMei> = traces
        .par_iter()
        .zip(&sim.states)
        .map(|(trace, state)| StepMei {
            time_index: state.time_index,
            hour: state.hour,
            start: state.start,
            duration: state.duration,
            nodes: assemble_step(trace, &source_eis),
            demand: state.node_demands.clone(),
        })
        .collect();

    Ok(MeiReport {
        layout,
        source_ids,
        source_eis,
        tanks,
        traces,
        steps,
        warnings,
    })
}

/// Demand-weighted daily MEI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyMei {
    /// Per node; `None` for nodes without demand over the horizon.
    pub nodes: Vec<Option<f64>>,
    /// Volume delivered to each node, m³.
    pub demand_volume: Vec<f64>,
    /// Over all consumers; `None` when nothing was delivered.
    pub system: Option<f64>,
}

pub fn daily_average_mei(report: &MeiReport) -> DailyMei {
    let n = report.layout.n_nodes();
    let mut weighted = vec![0.0; n];
    let mut volume = vec![0.0; n];
    for step in &report.steps {
        for j in 0..n {
            let q = step.demand[j] * step.duration;
            if q > 0.0 {
                if let Some(m) = &step.nodes[j] {
                    weighted[j] += m.total * q;
                    volume[j] += q;
                }
            }
        }
    }
    let total_volume: f64 = volume.iter().sum();
    let system = (total_volume > 0.0).then(|| weighted.iter().sum::<f64>() / total_volume);
    DailyMei {
        nodes: (0..n)
            .map(|j| (volume[j] > 0.0).then(|| weighted[j] / volume[j]))
            .collect(),
        demand_volume: volume,
        system,
    }
}

/// MEI per horizon hour and node. Periods within an hour are weighted by
/// delivered volume, or by duration at nodes without demand.
pub fn hourly_mei(report: &MeiReport) -> Vec<Vec<Option<f64>>> {
    let n = report.layout.n_nodes();
    let mut out = vec![vec![None; n]; HORIZON_HOURS];
    for (hour, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (mut wsum, mut vsum, mut dsum, mut tsum) = (0.0, 0.0, 0.0, 0.0);
            for step in report.steps.iter().filter(|s| s.hour == hour) {
                if let Some(m) = &step.nodes[j] {
                    let q = step.demand[j] * step.duration;
                    wsum += m.total * q;
                    vsum += q;
                    dsum += m.total * step.duration;
                    tsum += step.duration;
                }
            }
            *cell = if vsum > 0.0 {
                Some(wsum / vsum)
            } else if tsum > 0.0 {
                Some(dsum / tsum)
            } else {
                None
            };
        }
    }
    out
}

/// Sorted daily consumer MEI values with their cumulative fraction.
pub fn mei_cdf(daily: &DailyMei) -> Vec<(f64, f64)> {
    let mut values: Vec<f64> = daily.nodes.iter().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect()
}

/// Energy balance of a backtracked run, kWh.
///
/// Delivered energy (MEI times consumed volume) equals pump energy plus the
/// pre-injection energy of injected water plus the head dissipated in pipes
/// and valves, up to the energy moved in and out of storage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyClosure {
    pub consumed: f64,
    pub pump_energy: f64,
    pub pre_injection: f64,
    pub dissipation: f64,
    /// Energy carried out of tanks by released water.
    pub tank_release: f64,
    /// Energy carried into tanks by stored water.
    pub tank_charge: f64,
    /// Energy leaving through non-consumer exits (reservoirs taking water,
    /// inflow absorbed by discharging sources).
    pub exported: f64,
}

impl EnergyClosure {
    /// `consumed - (pump + pre-injection + dissipation)`.
    pub fn residual(&self) -> f64 {
        self.consumed - (self.pump_energy + self.pre_injection + self.dissipation)
    }

    pub fn relative(&self) -> f64 {
        relative(self.residual(), self.consumed)
    }

    /// Residual after accounting for storage and other exits.
    pub fn storage_adjusted(&self) -> f64 {
        self.residual() - (self.tank_release - self.tank_charge) + self.exported
    }

    pub fn storage_adjusted_relative(&self) -> f64 {
        relative(self.storage_adjusted(), self.consumed)
    }

    /// `consumed - (pump + pre-injection)`, ignoring dissipation.
    pub fn residual_excluding_dissipation(&self) -> f64 {
        self.consumed - (self.pump_energy + self.pre_injection)
    }
}

fn relative(x: f64, scale: f64) -> f64 {
    if scale != 0.0 {
        x / scale.abs()
    } else if x == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn energy_closure(report: &MeiReport, sim: &SimulationResult) -> EnergyClosure {
    let layout = &report.layout;
    let n_res = layout.n_reservoirs;
    let mut c = EnergyClosure {
        pump_energy: sim.states.iter().map(|s| s.pump_energy()).sum(),
        ..Default::default()
    };
    let mei_at = |step: &StepMei, j: usize| step.nodes[j].as_ref().map_or(0.0, |m| m.total);
    for (trace, step) in report.traces.iter().zip(&report.steps) {
        let snap = &trace.snapshot;
        let dt = snap.duration;
        for j in 0..layout.n_junctions {
            c.consumed += mei_at(step, j) * step.demand[j] * dt;
        }
        for e in &snap.edges {
            let is_pump = e.link.is_some_and(|l| layout.link_kinds[l] == LinkKind::Pump);
            if !is_pump {
                c.dissipation += e.flow * dt * mei_dist(e.head);
            }
            if snap.active_source_at(e.to).is_some() {
                c.exported += e.flow * dt * (mei_at(step, e.from) + mei_dist(e.head));
            }
        }
        for (s, &node) in snap.source_nodes.iter().enumerate() {
            let ei = report.source_eis[s].total();
            let net = snap.net_inflow(node);
            if snap.active[s] {
                let released = snap.outflow[node] * dt * ei;
                if s < n_res {
                    c.pre_injection += released;
                } else {
                    c.tank_release += released;
                }
            } else if net > 0.0 && snap.inflow[node] > 0.0 {
                let stored = net * dt * mei_at(step, node);
                if s < n_res {
                    c.exported += stored;
                } else {
                    c.tank_charge += stored;
                }
            }
        }
    }
    c
}
