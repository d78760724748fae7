//! Compiled network and the single-period network solve.
//!
//! The solve is a damped Newton iteration on the joint vector of open-link
//! flows and junction heads. Link equations state that the head loss of a
//! link equals the head difference across it; junction equations are mass
//! balances. Check valves, pumps and PRVs change status between Newton
//! solves until the status vector settles.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::headloss::hazen_williams_resistance_m3h;
use super::StepFailure;
use crate::network::{LinkKind, LinkStatus, Network, NodeKind, PumpModel};

/// Below this flow (m³/h, i.e. 1e-6 m³/s) head loss is linearised.
pub const SMALL_FLOW: f64 = 0.0036;
/// Minor-loss coefficient of a fully open PRV.
const OPEN_VALVE_K: f64 = 1.0;
const MASS_TOL: f64 = 1e-9;
const HEAD_TOL: f64 = 1e-9;
/// Flow / head slack used when switching link status.
const STATUS_QTOL: f64 = 1e-9;
const STATUS_HTOL: f64 = 1e-9;
const MAX_STATUS_CHANGES: usize = 40;
/// Smallest link Jacobian entry, keeps pumps at shutoff solvable.
const MIN_GRADIENT: f64 = 1e-10;

/// Ids and connectivity of a network in canonical order.
///
/// Nodes: junctions, reservoirs, tanks. Links: pipes, pumps, valves.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub node_ids: Vec<String>,
    pub node_kinds: Vec<NodeKind>,
    /// Junction / tank-bottom elevation, or reservoir head.
    pub elevations: Vec<f64>,
    pub link_ids: Vec<String>,
    pub link_kinds: Vec<LinkKind>,
    pub link_from: Vec<usize>,
    pub link_to: Vec<usize>,
    pub n_junctions: usize,
    pub n_reservoirs: usize,
    pub n_tanks: usize,
    pub n_pipes: usize,
    pub n_pumps: usize,
    pub n_valves: usize,
    node_index: HashMap<String, usize>,
    link_index: HashMap<String, usize>,
}

impl Layout {
    pub fn from_network(net: &Network) -> Result<Self, StepFailure> {
        let node_ids: Vec<String> = net.node_ids().map(str::to_string).collect();
        let node_index: HashMap<String, usize> =
            node_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let mut node_kinds = Vec::with_capacity(node_ids.len());
        let mut elevations = Vec::with_capacity(node_ids.len());
        for j in net.junctions.values() {
            node_kinds.push(NodeKind::Junction);
            elevations.push(j.elevation);
        }
        for r in net.reservoirs.values() {
            node_kinds.push(NodeKind::Reservoir);
            elevations.push(r.head);
        }
        for t in net.tanks.values() {
            node_kinds.push(NodeKind::Tank);
            elevations.push(t.elevation);
        }
        let mut link_ids = Vec::new();
        let mut link_kinds = Vec::new();
        let mut link_from = Vec::new();
        let mut link_to = Vec::new();
        for (id, from, to, kind) in net.links() {
            let lookup = |n: &str| {
                node_index.get(n).copied().ok_or_else(|| StepFailure::InvalidNetwork {
                    detail: format!("link {id} references missing node {n}"),
                })
            };
            link_from.push(lookup(from)?);
            link_to.push(lookup(to)?);
            link_ids.push(id.to_string());
            link_kinds.push(kind);
        }
        let link_index = link_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(Self {
            node_ids,
            node_kinds,
            elevations,
            link_ids,
            link_kinds,
            link_from,
            link_to,
            n_junctions: net.junctions.len(),
            n_reservoirs: net.reservoirs.len(),
            n_tanks: net.tanks.len(),
            n_pipes: net.pipes.len(),
            n_pumps: net.pumps.len(),
            n_valves: net.valves.len(),
            node_index,
            link_index,
        })
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn link(&self, id: &str) -> Option<usize> {
        self.link_index.get(id).copied()
    }

    pub fn n_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn n_links(&self) -> usize {
        self.link_ids.len()
    }

    /// Number of fixed-head nodes (reservoirs then tanks).
    pub fn n_fixed(&self) -> usize {
        self.n_reservoirs + self.n_tanks
    }

    pub fn reservoir_node(&self, i: usize) -> usize {
        self.n_junctions + i
    }

    pub fn tank_node(&self, i: usize) -> usize {
        self.n_junctions + self.n_reservoirs + i
    }

    pub fn pump_link(&self, i: usize) -> usize {
        self.n_pipes + i
    }

    pub fn valve_link(&self, i: usize) -> usize {
        self.n_pipes + self.n_pumps + i
    }

    pub fn is_junction(&self, node: usize) -> bool {
        node < self.n_junctions
    }
}

/// Direction a link may carry flow in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Allowed {
    #[default]
    Any,
    Forward,
    Backward,
    Neither,
}

impl Allowed {
    pub fn and(self, other: Allowed) -> Allowed {
        use Allowed::*;
        match (self, other) {
            (Any, x) | (x, Any) => x,
            (Forward, Forward) => Forward,
            (Backward, Backward) => Backward,
            _ => Neither,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkState {
    Open,
    Closed,
    /// PRV holding its downstream pressure.
    Active,
}

#[derive(Debug, Clone)]
enum LinkModel {
    Pipe { resistance: f64, check_valve: bool, closed: bool },
    Pump { model: PumpModel },
    Valve { setting_head: Option<f64>, k_open: f64, fixed: Option<LinkStatus> },
}

/// Inputs of one network solve.
#[derive(Debug, Clone)]
pub struct StepInput<'a> {
    /// Per junction, m³/h.
    pub demands: &'a [f64],
    /// Per pump.
    pub pump_on: &'a [bool],
    /// Per fixed node (reservoirs then tanks), total head m.
    pub fixed_heads: &'a [f64],
    /// Per link, extra direction restriction (e.g. full tanks).
    pub allowed: &'a [Allowed],
}

/// Converged flows and heads of one network solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSolution {
    /// Per link, m³/h, positive from -> to.
    pub flows: Vec<f64>,
    /// Per node, m.
    pub heads: Vec<f64>,
    pub states: Vec<LinkState>,
    pub newton_iterations: usize,
}

/// Network compiled for repeated solves.
#[derive(Debug, Clone)]
pub struct HydraulicModel {
    pub layout: Arc<Layout>,
    links: Vec<LinkModel>,
    pub max_iterations: usize,
}

impl HydraulicModel {
    pub fn new(net: &Network) -> Result<Self, StepFailure> {
        let layout = Layout::from_network(net)?;
        let mut links = Vec::with_capacity(layout.n_links());
        for p in net.pipes.values() {
            links.push(LinkModel::Pipe {
                resistance: hazen_williams_resistance_m3h(p.length, p.diameter, p.roughness),
                check_valve: p.check_valve,
                closed: p.status == LinkStatus::Closed,
            });
        }
        for p in net.pumps.values() {
            links.push(LinkModel::Pump { model: p.model });
        }
        for v in net.valves.values() {
            let to = layout.node(&v.to).expect("checked by layout");
            let setting_head = layout.is_junction(to).then(|| layout.elevations[to] + v.setting);
            // h = K v^2 / 2g with Q in m³/h
            let area = std::f64::consts::PI * v.diameter * v.diameter / 4.0;
            let k_open = OPEN_VALVE_K
                / (2.0 * crate::units::G * area * area * crate::units::SECONDS_PER_HOUR.powi(2));
            links.push(LinkModel::Valve {
                setting_head,
                k_open,
                fixed: v.fixed_status,
            });
        }
        Ok(Self {
            layout: Arc::new(layout),
            links,
            max_iterations: 200,
        })
    }

    /// Head loss `f(Q)` (from -> to) of an open, non-active link and `df/dQ`.
    fn link_loss(&self, k: usize, q: f64) -> (f64, f64) {
        match &self.links[k] {
            LinkModel::Pipe { resistance, .. } => hw_loss(*resistance, q),
            LinkModel::Pump { model } => {
                let (g, dg) = model.solver_gain(q);
                (-g, (-dg).max(MIN_GRADIENT))
            }
            LinkModel::Valve { k_open, .. } => quadratic_loss(*k_open, q),
        }
    }

    fn initial_flow(&self, k: usize) -> f64 {
        match &self.links[k] {
            LinkModel::Pipe { .. } | LinkModel::Valve { .. } => 1.0,
            LinkModel::Pump { model } => model.bep().map(|b| b.0).unwrap_or(10.0),
        }
    }

    fn initial_states(&self, input: &StepInput) -> (Vec<LinkState>, Vec<bool>) {
        let lay = &self.layout;
        let mut states = Vec::with_capacity(lay.n_links());
        let mut fixed = Vec::with_capacity(lay.n_links());
        for (k, link) in self.links.iter().enumerate() {
            let allowed = self.allowed(k, input);
            let (s, f) = match link {
                LinkModel::Pipe { closed: true, .. } => (LinkState::Closed, true),
                LinkModel::Pipe { .. } => (LinkState::Open, allowed == Allowed::Neither),
                LinkModel::Pump { .. } => {
                    let on = input.pump_on[k - lay.n_pipes];
                    (if on { LinkState::Open } else { LinkState::Closed }, !on || allowed == Allowed::Neither)
                }
                LinkModel::Valve { fixed: Some(LinkStatus::Closed), .. } => (LinkState::Closed, true),
                LinkModel::Valve { fixed: Some(LinkStatus::Open), .. } => (LinkState::Open, allowed == Allowed::Neither),
                LinkModel::Valve { setting_head: Some(_), .. } => (LinkState::Active, allowed == Allowed::Neither),
                LinkModel::Valve { setting_head: None, .. } => (LinkState::Open, allowed == Allowed::Neither),
            };
            states.push(if f { LinkState::Closed } else { s });
            fixed.push(f);
        }
        (states, fixed)
    }

    fn allowed(&self, k: usize, input: &StepInput) -> Allowed {
        let inherent = match &self.links[k] {
            LinkModel::Pipe { check_valve: true, .. } => Allowed::Forward,
            LinkModel::Pipe { .. } => Allowed::Any,
            LinkModel::Pump { .. } => Allowed::Forward,
            LinkModel::Valve { fixed: Some(LinkStatus::Open), .. } => Allowed::Any,
            LinkModel::Valve { .. } => Allowed::Forward,
        };
        inherent.and(input.allowed.get(k).copied().unwrap_or_default())
    }

    /// Solves one period. `warm` seeds flows, heads and statuses.
    pub fn solve(&self, input: &StepInput, warm: Option<&StepSolution>) -> Result<StepSolution, StepFailure> {
        let lay = &self.layout;
        assert_eq!(input.demands.len(), lay.n_junctions);
        assert_eq!(input.pump_on.len(), lay.n_pumps);
        assert_eq!(input.fixed_heads.len(), lay.n_fixed());

        let (mut states, fixed) = self.initial_states(input);
        let mut flows: Vec<f64> = (0..lay.n_links()).map(|k| self.initial_flow(k)).collect();
        let mean_fixed = if input.fixed_heads.is_empty() {
            0.0
        } else {
            input.fixed_heads.iter().sum::<f64>() / input.fixed_heads.len() as f64
        };
        let mut heads: Vec<f64> = (0..lay.n_nodes())
            .map(|n| if n < lay.n_junctions { mean_fixed } else { input.fixed_heads[n - lay.n_junctions] })
            .collect();
        if let Some(w) = warm {
            for k in 0..lay.n_links() {
                if !fixed[k] {
                    states[k] = w.states[k];
                    if w.states[k] != LinkState::Closed {
                        flows[k] = w.flows[k];
                    }
                }
            }
            heads[..lay.n_junctions].copy_from_slice(&w.heads[..lay.n_junctions]);
        }

        let mut history: Vec<Vec<LinkState>> = Vec::new();
        let mut total_iterations = 0;
        for _ in 0..MAX_STATUS_CHANGES {
            match self.newton(input, &states, &mut flows, &mut heads) {
                Ok(it) => total_iterations += it,
                Err(err @ StepFailure::Disconnected { .. }) => {
                    // Links closed by status rules may be what isolates the
                    // junction; reopen them and let the rules decide again.
                    history.push(states.clone());
                    let mut reopened = false;
                    for k in 0..lay.n_links() {
                        if !fixed[k] && states[k] == LinkState::Closed {
                            states[k] = LinkState::Open;
                            flows[k] = 0.0;
                            reopened = true;
                        }
                    }
                    if !reopened || history.contains(&states) {
                        return Err(err);
                    }
                    continue;
                }
                Err(e) => return Err(e),
            }
            history.push(states.clone());
            let changed = self.update_states(input, &fixed, &mut states, &flows, &heads);
            if !changed {
                for k in 0..lay.n_links() {
                    if states[k] == LinkState::Closed {
                        flows[k] = 0.0;
                    }
                }
                return Ok(StepSolution {
                    flows,
                    heads,
                    states,
                    newton_iterations: total_iterations,
                });
            }
            if history.contains(&states) {
                return Err(StepFailure::StatusCycling);
            }
        }
        Err(StepFailure::StatusCycling)
    }

    /// Runs Newton to convergence for fixed link states.
    fn newton(
        &self,
        input: &StepInput,
        states: &[LinkState],
        flows: &mut [f64],
        heads: &mut [f64],
    ) -> Result<usize, StepFailure> {
        let lay = &self.layout;
        let nj = lay.n_junctions;

        // Components over open links decide which junctions can be solved.
        let mut uf = UnionFind::new(lay.n_nodes());
        for k in 0..lay.n_links() {
            if states[k] != LinkState::Closed {
                uf.union(lay.link_from[k], lay.link_to[k]);
            }
        }
        let mut grounded = vec![false; lay.n_nodes()];
        for n in nj..lay.n_nodes() {
            grounded[uf.find(n)] = true;
        }
        let mut col = vec![usize::MAX; nj];
        let mut n_cols = 0;
        for j in 0..nj {
            if grounded[uf.find(j)] {
                col[j] = n_cols;
                n_cols += 1;
            } else if input.demands[j] > 0.0 {
                return Err(StepFailure::Disconnected {
                    node: lay.node_ids[j].clone(),
                });
            } else {
                heads[j] = lay.elevations[j];
            }
        }
        let rows: Vec<usize> = (0..lay.n_links())
            .filter(|&k| states[k] != LinkState::Closed && grounded[uf.find(lay.link_from[k])])
            .collect();
        for k in 0..lay.n_links() {
            if states[k] == LinkState::Closed {
                flows[k] = 0.0;
            }
        }
        let nl = rows.len();
        let n = nl + n_cols;
        if n == 0 {
            return Ok(0);
        }
        let head_of = |heads: &[f64], node: usize| -> f64 {
            if node < nj {
                heads[node]
            } else {
                input.fixed_heads[node - nj]
            }
        };

        let residual = |flows: &[f64], heads: &[f64], r: &mut DVector<f64>, jac: Option<&mut DMatrix<f64>>| {
            let mut jac = jac;
            if let Some(j) = jac.as_mut() {
                j.fill(0.0);
            }
            for (row, &k) in rows.iter().enumerate() {
                let (a, b) = (lay.link_from[k], lay.link_to[k]);
                if states[k] == LinkState::Active {
                    let LinkModel::Valve { setting_head: Some(hs), .. } = self.links[k] else {
                        unreachable!("only PRVs with a junction downstream go active")
                    };
                    r[row] = head_of(heads, b) - hs;
                    if let Some(j) = jac.as_mut() {
                        j[(row, nl + col[b])] = 1.0;
                    }
                    continue;
                }
                let (f, df) = self.link_loss(k, flows[k]);
                r[row] = f - (head_of(heads, a) - head_of(heads, b));
                if let Some(j) = jac.as_mut() {
                    j[(row, row)] = df.max(MIN_GRADIENT);
                    if a < nj {
                        j[(row, nl + col[a])] = -1.0;
                    }
                    if b < nj {
                        j[(row, nl + col[b])] = 1.0;
                    }
                }
            }
            for j in 0..nj {
                if col[j] != usize::MAX {
                    r[nl + col[j]] = -input.demands[j];
                }
            }
            for (row, &k) in rows.iter().enumerate() {
                let (a, b) = (lay.link_from[k], lay.link_to[k]);
                if b < nj {
                    r[nl + col[b]] += flows[k];
                    if let Some(j) = jac.as_mut() {
                        j[(nl + col[b], row)] += 1.0;
                    }
                }
                if a < nj {
                    r[nl + col[a]] -= flows[k];
                    if let Some(j) = jac.as_mut() {
                        j[(nl + col[a], row)] -= 1.0;
                    }
                }
            }
        };
        let merit = |r: &DVector<f64>| r.iter().map(|v| v * v).sum::<f64>();
        let converged = |r: &DVector<f64>| {
            r.rows(0, nl).iter().all(|v| v.abs() < HEAD_TOL) && r.rows(nl, n_cols).iter().all(|v| v.abs() < MASS_TOL)
        };

        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, n);
        let mut trial_r = DVector::zeros(n);
        let mut trial_flows = flows.to_vec();
        let mut trial_heads = heads.to_vec();
        residual(flows, heads, &mut r, Some(&mut jac));
        for iter in 0..self.max_iterations {
            if converged(&r) {
                return Ok(iter);
            }
            let mut dx = -&r;
            if !lu_solve_in_place(&mut jac, &mut dx) {
                return Err(StepFailure::Singular);
            }
            let m0 = merit(&r);
            let mut alpha = 1.0;
            // The factorized Jacobian is no longer needed, so each trial
            // evaluation refills it; the accepted trial leaves it current.
            loop {
                for (row, &k) in rows.iter().enumerate() {
                    trial_flows[k] = flows[k] + alpha * dx[row];
                }
                for j in 0..nj {
                    if col[j] != usize::MAX {
                        trial_heads[j] = heads[j] + alpha * dx[nl + col[j]];
                    }
                }
                residual(&trial_flows, &trial_heads, &mut trial_r, Some(&mut jac));
                if merit(&trial_r) < m0 || alpha < 1.0 / 1024.0 {
                    break;
                }
                alpha *= 0.5;
            }
            for &k in &rows {
                flows[k] = trial_flows[k];
            }
            for j in 0..nj {
                if col[j] != usize::MAX {
                    heads[j] = trial_heads[j];
                }
            }
            std::mem::swap(&mut r, &mut trial_r);
        }
        residual(flows, heads, &mut r, None);
        if converged(&r) {
            return Ok(self.max_iterations);
        }
        let worst_head = r.rows(0, nl).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst_mass = r.rows(nl, n_cols).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Err(StepFailure::NonConvergence {
            iterations: self.max_iterations,
            worst_head,
            worst_mass,
        })
    }

    /// Applies status rules; returns whether anything changed.
    fn update_states(
        &self,
        input: &StepInput,
        fixed: &[bool],
        states: &mut [LinkState],
        flows: &[f64],
        heads: &[f64],
    ) -> bool {
        let lay = &self.layout;
        let nj = lay.n_junctions;
        let head_of = |node: usize| if node < nj { heads[node] } else { input.fixed_heads[node - nj] };
        let mut changed = false;
        for k in 0..lay.n_links() {
            if fixed[k] {
                continue;
            }
            let q = flows[k];
            let (ha, hb) = (head_of(lay.link_from[k]), head_of(lay.link_to[k]));
            let allowed = self.allowed(k, input);
            let old = states[k];
            let new = match &self.links[k] {
                LinkModel::Valve { setting_head: Some(hs), fixed: None, .. } => {
                    prv_transition(old, q, ha, hb, *hs, allowed)
                }
                LinkModel::Pump { model } => match old {
                    LinkState::Open if q < -STATUS_QTOL => LinkState::Closed,
                    LinkState::Closed if model.shutoff_head() > hb - ha + STATUS_HTOL => LinkState::Open,
                    s => s,
                },
                _ => directional_transition(old, q, ha - hb, allowed),
            };
            if new != old {
                states[k] = new;
                changed = true;
            }
        }
        changed
    }
}

fn directional_transition(old: LinkState, q: f64, dh: f64, allowed: Allowed) -> LinkState {
    match (allowed, old) {
        (Allowed::Forward, LinkState::Open) if q < -STATUS_QTOL => LinkState::Closed,
        (Allowed::Forward, LinkState::Closed) if dh > STATUS_HTOL => LinkState::Open,
        (Allowed::Backward, LinkState::Open) if q > STATUS_QTOL => LinkState::Closed,
        (Allowed::Backward, LinkState::Closed) if dh < -STATUS_HTOL => LinkState::Open,
        (_, s) => s,
    }
}

fn prv_transition(old: LinkState, q: f64, ha: f64, hb: f64, hs: f64, allowed: Allowed) -> LinkState {
    if allowed != Allowed::Forward {
        return LinkState::Closed;
    }
    match old {
        LinkState::Active => {
            if q < -STATUS_QTOL {
                LinkState::Closed
            } else if ha < hs - STATUS_HTOL {
                LinkState::Open
            } else {
                LinkState::Active
            }
        }
        LinkState::Open => {
            if q < -STATUS_QTOL {
                LinkState::Closed
            } else if hb > hs + STATUS_HTOL {
                LinkState::Active
            } else {
                LinkState::Open
            }
        }
        LinkState::Closed => {
            if ha > hs + STATUS_HTOL && hb < hs - STATUS_HTOL {
                LinkState::Active
            } else if ha < hs - STATUS_HTOL && ha > hb + STATUS_HTOL {
                LinkState::Open
            } else {
                LinkState::Closed
            }
        }
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting,
/// overwriting `a` with its factors and `b` with `x`. Returns false when
/// `a` is numerically singular.
fn lu_solve_in_place(a: &mut DMatrix<f64>, b: &mut DVector<f64>) -> bool {
    let n = b.len();
    let m = a.as_mut_slice();
    let x = b.as_mut_slice();
    // column-major: element (i, j) lives at j * n + i
    for k in 0..n {
        let mut p = k;
        let mut best = m[k * n + k].abs();
        for i in k + 1..n {
            let v = m[k * n + i].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= 0.0 || !best.is_finite() {
            return false;
        }
        if p != k {
            for j in 0..n {
                m.swap(j * n + k, j * n + p);
            }
            x.swap(k, p);
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let f = m[k * n + i] / pivot;
            if f == 0.0 {
                continue;
            }
            m[k * n + i] = f;
            for j in k + 1..n {
                m[j * n + i] -= f * m[j * n + k];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut v = x[k];
        for j in k + 1..n {
            v -= m[j * n + k] * x[j];
        }
        x[k] = v / m[k * n + k];
    }
    x.iter().all(|v| v.is_finite())
}

/// Hazen-Williams loss with the small-flow linearisation.
fn hw_loss(r: f64, q: f64) -> (f64, f64) {
    let qa = q.abs();
    if qa < SMALL_FLOW {
        let g = r * SMALL_FLOW.powf(0.852);
        (g * q, g)
    } else {
        let g = r * qa.powf(0.852);
        (g * q, 1.852 * g)
    }
}

fn quadratic_loss(k: f64, q: f64) -> (f64, f64) {
    let qa = q.abs();
    if qa < SMALL_FLOW {
        (k * SMALL_FLOW * q, k * SMALL_FLOW)
    } else {
        (k * qa * q, 2.0 * k * qa)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

