//! Flow-oriented view of one converged hydraulic period.

use serde::Serialize;

use crate::hydraulics::{HydraulicState, Layout};
use crate::network::LinkKind;

/// Flows at or below this magnitude (m³/h) are treated as numerical noise.
pub const DEFAULT_FLOW_EPSILON: f64 = 1e-6;

/// Directed edge carrying water from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    /// m³/h, always positive.
    pub flow: f64,
    /// Head spent along the edge, m. Pipes and valves use the absolute
    /// head difference, pumps the head gain divided by efficiency.
    pub head: f64,
    /// Originating link, if the edge came from a network.
    pub link: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSnapshot {
    pub time_index: usize,
    pub hour: usize,
    /// h
    pub duration: f64,
    pub n_nodes: usize,
    pub edges: Vec<FlowEdge>,
    /// Total inflow per node, m³/h.
    pub inflow: Vec<f64>,
    /// Total outflow per node, m³/h.
    pub outflow: Vec<f64>,
    /// Consumer withdrawal per node, m³/h.
    pub demand: Vec<f64>,
    /// Node of every potential source (reservoirs first, then tanks).
    pub source_nodes: Vec<usize>,
    /// Whether each source delivers water during this period.
    pub active: Vec<bool>,
    incoming: Vec<Vec<usize>>,
}

impl FlowSnapshot {
    /// Builds a snapshot from explicit edges. Edges must carry positive flow.
    pub fn new(
        n_nodes: usize,
        edges: Vec<FlowEdge>,
        demand: Vec<f64>,
        source_nodes: Vec<usize>,
        active: Vec<bool>,
    ) -> Self {
        assert_eq!(demand.len(), n_nodes);
        assert_eq!(source_nodes.len(), active.len());
        let mut inflow = vec![0.0; n_nodes];
        let mut outflow = vec![0.0; n_nodes];
        let mut incoming = vec![Vec::new(); n_nodes];
        for (e, edge) in edges.iter().enumerate() {
            debug_assert!(edge.flow > 0.0);
            inflow[edge.to] += edge.flow;
            outflow[edge.from] += edge.flow;
            incoming[edge.to].push(e);
        }
        Self {
            time_index: 0,
            hour: 0,
            duration: 1.0,
            n_nodes,
            edges,
            inflow,
            outflow,
            demand,
            source_nodes,
            active,
            incoming,
        }
    }

    pub fn n_sources(&self) -> usize {
        self.source_nodes.len()
    }

    /// Inflow minus outflow and demand, m³/h.
    pub fn net_inflow(&self, node: usize) -> f64 {
        self.inflow[node] - self.outflow[node] - self.demand[node]
    }

    /// Indices into `edges` of the edges entering `node`.
    pub fn incoming(&self, node: usize) -> &[usize] {
        &self.incoming[node]
    }

    /// Source index of `node` when it is an active source.
    pub fn active_source_at(&self, node: usize) -> Option<usize> {
        self.source_nodes
            .iter()
            .zip(&self.active)
            .position(|(n, a)| *a && *n == node)
    }
}

/// Orients every link of `state` by its flow sign and attaches the head
/// spent along it.
pub fn build_flow_snapshot(state: &HydraulicState, layout: &Layout, flow_epsilon: f64) -> FlowSnapshot {
    let mut edges = Vec::new();
    for (l, &q) in state.link_flows.iter().enumerate() {
        if q.abs() <= flow_epsilon {
            continue;
        }
        let (a, b) = (layout.link_from[l], layout.link_to[l]);
        let (from, to) = if q > 0.0 { (a, b) } else { (b, a) };
        let head = match layout.link_kinds[l] {
            LinkKind::Pump => {
                let op = &state.pumps[l - layout.n_pipes];
                if op.efficiency > 0.0 {
                    op.head_gain.max(0.0) / op.efficiency
                } else {
                    0.0
                }
            }
            LinkKind::Pipe | LinkKind::Valve => (state.node_heads[a] - state.node_heads[b]).abs(),
        };
        edges.push(FlowEdge {
            from,
            to,
            flow: q.abs(),
            head,
            link: Some(l),
        });
    }

    let mut source_nodes = Vec::with_capacity(layout.n_fixed());
    let mut active = Vec::with_capacity(layout.n_fixed());
    for i in 0..layout.n_reservoirs {
        source_nodes.push(layout.reservoir_node(i));
        active.push(state.reservoir_outflow[i] > flow_epsilon);
    }
    for i in 0..layout.n_tanks {
        source_nodes.push(layout.tank_node(i));
        active.push(state.tank_net_inflow[i] < -flow_epsilon);
    }

    let mut snap = FlowSnapshot::new(
        layout.n_nodes(),
        edges,
        state.node_demands.clone(),
        source_nodes,
        active,
    );
    snap.time_index = state.time_index;
    snap.hour = state.hour;
    snap.duration = state.duration;
    snap
}
