//! Water distribution network data model.

pub mod curves;

use std::collections::{BTreeSet, VecDeque};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use curves::{reconstruct_pump_curves, CurveError, PumpCurves, PumpModel, PowerHeadCurve};

/// Hours in the scheduling horizon and length of every pattern/price series.
pub const HORIZON_HOURS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: String,
    /// m
    pub elevation: f64,
    /// m³/h
    pub base_demand: f64,
    pub pattern: Option<String>,
}

/// Cylindrical storage tank. Levels are measured from `elevation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tank {
    pub id: String,
    pub elevation: f64,
    pub init_level: f64,
    pub min_level: f64,
    pub max_level: f64,
    pub diameter: f64,
}

impl Tank {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }

    pub fn level_range(&self) -> f64 {
        self.max_level - self.min_level
    }
}

/// Fixed-head node where treated water enters the distribution network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionPoint {
    pub id: String,
    /// Total hydraulic head, m.
    pub head: f64,
    /// kWh/m³
    pub transmission_ei: f64,
    /// kWh/m³
    pub treatment_ei: f64,
    /// Planned share of daily injection.
    pub target_fraction: f64,
}

impl InjectionPoint {
    /// Transmission plus treatment energy intensity, kWh/m³.
    pub fn pre_injection_ei(&self) -> f64 {
        self.transmission_ei + self.treatment_ei
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkStatus {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipe {
    pub id: String,
    pub from: String,
    pub to: String,
    /// m
    pub length: f64,
    /// m
    pub diameter: f64,
    /// Hazen-Williams C
    pub roughness: f64,
    pub check_valve: bool,
    pub status: LinkStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pump {
    pub id: String,
    pub from: String,
    pub to: String,
    pub model: PumpModel,
}

/// Pressure reducing valve. `fixed_status` pins the valve open or closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prv {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Downstream pressure head setting, m.
    pub setting: f64,
    /// m
    pub diameter: f64,
    pub fixed_status: Option<LinkStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub id: String,
    /// Hourly multipliers indexed by clock hour.
    pub multipliers: Vec<f64>,
}

/// Hourly electricity prices indexed by clock hour (currency/kWh).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub id: String,
    pub prices: Vec<f64>,
}

impl PriceSeries {
    pub fn flat(id: &str, price: f64) -> Self {
        Self {
            id: id.to_string(),
            prices: vec![price; HORIZON_HOURS],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Junction,
    Reservoir,
    Tank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkKind {
    Pipe,
    Pump,
    Valve,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Network {
    pub title: String,
    pub junctions: IndexMap<String, Junction>,
    pub reservoirs: IndexMap<String, InjectionPoint>,
    pub tanks: IndexMap<String, Tank>,
    pub pipes: IndexMap<String, Pipe>,
    pub pumps: IndexMap<String, Pump>,
    pub valves: IndexMap<String, Prv>,
    pub patterns: IndexMap<String, Pattern>,
    pub coordinates: IndexMap<String, (f64, f64)>,
    /// Pattern applied to junctions that name none.
    pub default_pattern: Option<String>,
    /// Clock hour (0-23) of the first simulated step.
    pub horizon_start_hour: usize,
    pub horizon_steps: usize,
}

impl Network {
    pub fn new() -> Self {
        Self {
            horizon_steps: HORIZON_HOURS,
            ..Default::default()
        }
    }

    pub fn node_kind(&self, id: &str) -> Option<NodeKind> {
        if self.junctions.contains_key(id) {
            Some(NodeKind::Junction)
        } else if self.reservoirs.contains_key(id) {
            Some(NodeKind::Reservoir)
        } else if self.tanks.contains_key(id) {
            Some(NodeKind::Tank)
        } else {
            None
        }
    }

    /// Node ids in canonical order: junctions, reservoirs, tanks.
    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.junctions
            .keys()
            .chain(self.reservoirs.keys())
            .chain(self.tanks.keys())
            .map(String::as_str)
    }

    pub fn node_count(&self) -> usize {
        self.junctions.len() + self.reservoirs.len() + self.tanks.len()
    }

    pub fn node_elevation(&self, id: &str) -> Option<f64> {
        if let Some(j) = self.junctions.get(id) {
            Some(j.elevation)
        } else if let Some(r) = self.reservoirs.get(id) {
            Some(r.head)
        } else {
            self.tanks.get(id).map(|t| t.elevation)
        }
    }

    /// `(id, from, to, kind)` for every link in canonical order: pipes,
    /// pumps, valves.
    pub fn links(&self) -> impl Iterator<Item = (&str, &str, &str, LinkKind)> {
        let pipes = self
            .pipes
            .values()
            .map(|p| (p.id.as_str(), p.from.as_str(), p.to.as_str(), LinkKind::Pipe));
        let pumps = self
            .pumps
            .values()
            .map(|p| (p.id.as_str(), p.from.as_str(), p.to.as_str(), LinkKind::Pump));
        let valves = self
            .valves
            .values()
            .map(|v| (v.id.as_str(), v.from.as_str(), v.to.as_str(), LinkKind::Valve));
        pipes.chain(pumps).chain(valves)
    }

    /// Pattern multiplier for a junction at horizon step `step` (hourly).
    pub fn multiplier(&self, junction: &Junction, step: usize) -> f64 {
        let pattern = junction
            .pattern
            .as_ref()
            .or(self.default_pattern.as_ref())
            .and_then(|p| self.patterns.get(p));
        match pattern {
            Some(p) if !p.multipliers.is_empty() => {
                let hour = (self.horizon_start_hour + step) % p.multipliers.len();
                p.multipliers[hour]
            }
            _ => 1.0,
        }
    }

    /// Demand of a junction at horizon step `step`, m³/h.
    pub fn demand_at(&self, junction: &Junction, step: usize) -> f64 {
        junction.base_demand * self.multiplier(junction, step)
    }

    /// True when the junction draws water at some hour of the horizon.
    pub fn is_consumer(&self, junction: &Junction) -> bool {
        (0..self.horizon_steps.max(1)).any(|t| self.demand_at(junction, t) > 0.0)
    }

    pub fn consumers(&self) -> impl Iterator<Item = &Junction> {
        self.junctions.values().filter(|j| self.is_consumer(j))
    }

    /// Clock hour of horizon step `step`.
    pub fn clock_hour(&self, step: usize) -> usize {
        (self.horizon_start_hour + step) % HORIZON_HOURS
    }
}

/// Rule broken by a network element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    DanglingReference,
    DuplicateId,
    SameEndpoints,
    NonFinite,
    NonPositive,
    NegativeDemand,
    LevelOrdering,
    MissingPattern,
    PatternLength,
    NegativeMultiplier,
    NegativeEnergyIntensity,
    TargetFractionRange,
    TargetFractionSum,
    NegativeSetting,
    PumpCurve,
    NoInjectionPoint,
    Disconnected,
    HorizonStart,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub element: String,
    pub rule: Rule,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {:?}: {}", self.element, self.rule, self.detail)
    }
}

const FRACTION_SUM_TOL: f64 = 1e-9;

/// Checks every type invariant and source-to-consumer connectivity.
///
/// Returns violations sorted, so the result does not depend on the order
/// elements were inserted.
pub fn validate_network(net: &Network) -> Vec<Violation> {
    let mut out = BTreeSet::new();
    let mut push = |element: &str, rule: Rule, detail: String| {
        out.insert(Violation {
            element: element.to_string(),
            rule,
            detail,
        });
    };

    // node ids must be unique across node kinds
    for id in net.junctions.keys() {
        if net.reservoirs.contains_key(id) || net.tanks.contains_key(id) {
            push(id, Rule::DuplicateId, "node id used by more than one node kind".into());
        }
    }
    for id in net.reservoirs.keys() {
        if net.tanks.contains_key(id) {
            push(id, Rule::DuplicateId, "node id used by more than one node kind".into());
        }
    }
    for id in net.pipes.keys() {
        if net.pumps.contains_key(id) || net.valves.contains_key(id) {
            push(id, Rule::DuplicateId, "link id used by more than one link kind".into());
        }
    }
    for id in net.pumps.keys() {
        if net.valves.contains_key(id) {
            push(id, Rule::DuplicateId, "link id used by more than one link kind".into());
        }
    }

    for j in net.junctions.values() {
        if !j.elevation.is_finite() {
            push(&j.id, Rule::NonFinite, "elevation is not finite".into());
        }
        if !j.base_demand.is_finite() {
            push(&j.id, Rule::NonFinite, "base demand is not finite".into());
        } else if j.base_demand < 0.0 {
            push(&j.id, Rule::NegativeDemand, format!("base demand {} < 0", j.base_demand));
        }
        if let Some(p) = &j.pattern {
            if !net.patterns.contains_key(p) {
                push(&j.id, Rule::MissingPattern, format!("pattern '{p}' not defined"));
            }
        }
    }
    if let Some(p) = &net.default_pattern {
        // EPANET treats a missing default pattern as constant 1
        if !net.patterns.contains_key(p) && p != "1" {
            push("[OPTIONS]", Rule::MissingPattern, format!("default pattern '{p}' not defined"));
        }
    }

    for t in net.tanks.values() {
        let vals = [t.elevation, t.init_level, t.min_level, t.max_level, t.diameter];
        if vals.iter().any(|v| !v.is_finite()) {
            push(&t.id, Rule::NonFinite, "tank field is not finite".into());
            continue;
        }
        if t.min_level > t.init_level || t.init_level > t.max_level {
            push(
                &t.id,
                Rule::LevelOrdering,
                format!(
                    "expected min {} <= init {} <= max {}",
                    t.min_level, t.init_level, t.max_level
                ),
            );
        }
        if t.diameter <= 0.0 {
            push(&t.id, Rule::NonPositive, format!("diameter {} <= 0", t.diameter));
        }
    }

    let mut fraction_sum = 0.0;
    for r in net.reservoirs.values() {
        if !r.head.is_finite() {
            push(&r.id, Rule::NonFinite, "head is not finite".into());
        }
        if r.transmission_ei < 0.0 || r.treatment_ei < 0.0 {
            push(&r.id, Rule::NegativeEnergyIntensity, "energy intensities must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&r.target_fraction) {
            push(
                &r.id,
                Rule::TargetFractionRange,
                format!("target fraction {} outside [0, 1]", r.target_fraction),
            );
        }
        fraction_sum += r.target_fraction;
    }
    if net.reservoirs.is_empty() {
        push("network", Rule::NoInjectionPoint, "no injection point defined".into());
    } else if (fraction_sum - 1.0).abs() > FRACTION_SUM_TOL {
        push(
            "network",
            Rule::TargetFractionSum,
            format!("target fractions sum to {fraction_sum}, expected 1"),
        );
    }

    for p in net.patterns.values() {
        if p.multipliers.len() != HORIZON_HOURS {
            push(
                &p.id,
                Rule::PatternLength,
                format!("{} multipliers, expected {HORIZON_HOURS}", p.multipliers.len()),
            );
        }
        if p.multipliers.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            push(&p.id, Rule::NegativeMultiplier, "multipliers must be finite and >= 0".into());
        }
    }

    for (id, from, to, _) in net.links() {
        for end in [from, to] {
            if net.node_kind(end).is_none() {
                push(id, Rule::DanglingReference, format!("node '{end}' does not exist"));
            }
        }
        if from == to {
            push(id, Rule::SameEndpoints, "link starts and ends at the same node".into());
        }
    }
    for p in net.pipes.values() {
        for (name, v) in [("length", p.length), ("diameter", p.diameter), ("roughness", p.roughness)] {
            if !v.is_finite() {
                push(&p.id, Rule::NonFinite, format!("{name} is not finite"));
            } else if v <= 0.0 {
                push(&p.id, Rule::NonPositive, format!("{name} {v} <= 0"));
            }
        }
    }
    for v in net.valves.values() {
        if !(v.setting.is_finite() && v.setting >= 0.0) {
            push(&v.id, Rule::NegativeSetting, format!("setting {} < 0", v.setting));
        }
        if !(v.diameter.is_finite() && v.diameter > 0.0) {
            push(&v.id, Rule::NonPositive, format!("diameter {} <= 0", v.diameter));
        }
    }
    for p in net.pumps.values() {
        let ok = match &p.model {
            PumpModel::Bep(c) => reconstruct_pump_curves(c.bep_flow, c.bep_head, c.bep_eff).is_ok(),
            PumpModel::PowerCurve(c) => {
                c.shutoff > 0.0 && c.coeff > 0.0 && c.exponent > 0.0 && c.bep_eff > 0.0 && c.bep_eff <= 1.0
            }
            PumpModel::ConstantPower { power_kw, efficiency } => {
                *power_kw > 0.0 && *efficiency > 0.0 && *efficiency <= 1.0
            }
        };
        if !ok {
            push(&p.id, Rule::PumpCurve, "pump curve parameters out of range".into());
        }
    }
    if net.horizon_start_hour >= HORIZON_HOURS {
        push(
            "[TIMES]",
            Rule::HorizonStart,
            format!("start hour {} outside 0..23", net.horizon_start_hour),
        );
    }

    for id in unreachable_consumers(net) {
        push(&id, Rule::Disconnected, "no path from any injection point".into());
    }

    out.into_iter().collect()
}

/// Consumers with no undirected path to an injection point.
fn unreachable_consumers(net: &Network) -> Vec<String> {
    let ids: Vec<&str> = net.node_ids().collect();
    let index: std::collections::HashMap<&str, usize> =
        ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut adj = vec![Vec::new(); ids.len()];
    for (_, from, to, _) in net.links() {
        if let (Some(&a), Some(&b)) = (index.get(from), index.get(to)) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; ids.len()];
    let mut queue: VecDeque<usize> = net.reservoirs.keys().map(|id| index[id.as_str()]).collect();
    for &s in &queue {
        seen[s] = true;
    }
    while let Some(n) = queue.pop_front() {
        for &m in &adj[n] {
            if !seen[m] {
                seen[m] = true;
                queue.push_back(m);
            }
        }
    }
    net.consumers()
        .filter(|j| !seen[index[j.id.as_str()]])
        .map(|j| j.id.clone())
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn two_node() -> Network {
        let mut net = Network::new();
        net.reservoirs.insert(
            "R".into(),
            InjectionPoint {
                id: "R".into(),
                head: 50.0,
                transmission_ei: 0.3,
                treatment_ei: 0.1,
                target_fraction: 1.0,
            },
        );
        net.junctions.insert(
            "J".into(),
            Junction {
                id: "J".into(),
                elevation: 10.0,
                base_demand: 36.0,
                pattern: None,
            },
        );
        net.pipes.insert(
            "P".into(),
            Pipe {
                id: "P".into(),
                from: "R".into(),
                to: "J".into(),
                length: 1000.0,
                diameter: 0.3,
                roughness: 100.0,
                check_valve: false,
                status: LinkStatus::Open,
            },
        );
        net
    }

    #[test]
    fn well_formed_has_no_violations() {
        assert!(validate_network(&two_node()).is_empty());
    }

    #[test]
    fn dangling_reference() {
        let mut net = two_node();
        net.pipes.get_mut("P").unwrap().to = "X".into();
        let v = validate_network(&net);
        let dangling: Vec<_> = v.iter().filter(|v| v.rule == Rule::DanglingReference).collect();
        assert_eq!(dangling.len(), 1);
        assert_eq!(dangling[0].element, "P");
        // J lost its only link
        assert!(v.iter().any(|v| v.rule == Rule::Disconnected && v.element == "J"));
    }

    #[test]
    fn tank_level_ordering() {
        let mut net = two_node();
        net.tanks.insert(
            "T".into(),
            Tank {
                id: "T".into(),
                elevation: 40.0,
                init_level: 6.0,
                min_level: 0.0,
                max_level: 5.0,
                diameter: 10.0,
            },
        );
        let v = validate_network(&net);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::LevelOrdering);
        assert_eq!(v[0].element, "T");
    }

    #[test]
    fn pre_injection_identity() {
        let net = two_node();
        let r = &net.reservoirs["R"];
        assert_eq!(r.pre_injection_ei() - (r.transmission_ei + r.treatment_ei), 0.0);
    }

    #[test]
    fn validation_is_order_independent() {
        let mut a = two_node();
        a.pipes.get_mut("P").unwrap().length = -1.0;
        a.junctions.insert(
            "K".into(),
            Junction {
                id: "K".into(),
                elevation: f64::NAN,
                base_demand: -1.0,
                pattern: Some("nope".into()),
            },
        );
        let mut b = Network::new();
        b.junctions.insert("K".into(), a.junctions["K"].clone());
        b.junctions.insert("J".into(), a.junctions["J"].clone());
        b.pipes = a.pipes.clone();
        b.reservoirs = a.reservoirs.clone();
        let va = validate_network(&a);
        assert_eq!(va, validate_network(&b));
        assert_eq!(va, validate_network(&a));
        assert!(va.len() >= 3);
    }

    #[test]
    fn demand_follows_clock_hour() {
        let mut net = two_node();
        let mut m = vec![1.0; 24];
        m[6] = 2.0;
        net.patterns.insert("1".into(), Pattern { id: "1".into(), multipliers: m });
        net.junctions.get_mut("J").unwrap().pattern = Some("1".into());
        net.horizon_start_hour = 6;
        let j = net.junctions["J"].clone();
        assert_eq!(net.demand_at(&j, 0), 72.0);
        assert_eq!(net.demand_at(&j, 1), 36.0);
        assert_eq!(net.demand_at(&j, 18), 36.0);
    }
}
