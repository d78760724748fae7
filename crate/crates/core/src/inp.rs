//! Reader and writer for the subset of the EPANET INP format used by this
//! crate.
//!
//! Supported sections: `[TITLE] [JUNCTIONS] [RESERVOIRS] [TANKS] [PIPES]
//! [PUMPS] [VALVES] [CURVES] [PATTERNS] [DEMANDS] [STATUS] [COORDINATES]
//! [OPTIONS] [TIMES]`. Anything else is skipped and reported as a warning.
//!
//! Values are converted to SI on read according to the `Units` option
//! (US flow units imply feet, inches and psi; SI flow units imply metres,
//! millimetres and metres of head). The writer always emits CMH.

use std::collections::HashMap;
use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use crate::network::{
    validate_network, InjectionPoint, Junction, LinkStatus, Network, Pattern, Pipe, PowerHeadCurve, Prv,
    Pump, PumpModel, Tank, Violation, HORIZON_HOURS,
};
use crate::network::curves::{reconstruct_pump_curves, DEFAULT_BEP_EFF};
use crate::units::{ACRE_FT_M3, FT_TO_M, HP_TO_KW, IMP_GAL_M3, IN_TO_M, MM_TO_M, PSI_TO_M, US_GAL_M3};

#[derive(Debug, Error)]
pub enum InpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("network failed validation:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

/// Parsed network plus non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct ParsedInp {
    pub network: Network,
    pub warnings: Vec<String>,
}

/// Flow unit of an INP file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowUnits {
    Cfs,
    Gpm,
    Mgd,
    Imgd,
    Afd,
    Lps,
    Lpm,
    Mld,
    Cmh,
    Cmd,
}

impl FlowUnits {
    fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "CFS" => Self::Cfs,
            "GPM" => Self::Gpm,
            "MGD" => Self::Mgd,
            "IMGD" => Self::Imgd,
            "AFD" => Self::Afd,
            "LPS" => Self::Lps,
            "LPM" => Self::Lpm,
            "MLD" => Self::Mld,
            "CMH" => Self::Cmh,
            "CMD" => Self::Cmd,
            _ => return None,
        })
    }

    pub fn is_us(self) -> bool {
        matches!(self, Self::Cfs | Self::Gpm | Self::Mgd | Self::Imgd | Self::Afd)
    }

    /// Multiplier taking a flow in these units to m³/h.
    pub fn to_m3h(self) -> f64 {
        match self {
            Self::Cfs => FT_TO_M.powi(3) * 3600.0,
            Self::Gpm => US_GAL_M3 * 60.0,
            Self::Mgd => US_GAL_M3 * 1e6 / 24.0,
            Self::Imgd => IMP_GAL_M3 * 1e6 / 24.0,
            Self::Afd => ACRE_FT_M3 / 24.0,
            Self::Lps => 3.6,
            Self::Lpm => 0.06,
            Self::Mld => 1000.0 / 24.0,
            Self::Cmh => 1.0,
            Self::Cmd => 1.0 / 24.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Units {
    flow: f64,
    length: f64,
    diameter: f64,
    pressure: f64,
    power: f64,
}

impl Units {
    fn new(f: FlowUnits) -> Self {
        if f.is_us() {
            Units {
                flow: f.to_m3h(),
                length: FT_TO_M,
                diameter: IN_TO_M,
                pressure: PSI_TO_M,
                power: HP_TO_KW,
            }
        } else {
            Units {
                flow: f.to_m3h(),
                length: 1.0,
                diameter: MM_TO_M,
                pressure: 1.0,
                power: 1.0,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Title,
    Junctions,
    Reservoirs,
    Tanks,
    Pipes,
    Pumps,
    Valves,
    Curves,
    Patterns,
    Demands,
    Status,
    Coordinates,
    Options,
    Times,
    End,
    Unknown,
}

impl Section {
    fn parse(name: &str) -> Self {
        match name.to_ascii_uppercase().as_str() {
            "TITLE" => Self::Title,
            "JUNCTIONS" => Self::Junctions,
            "RESERVOIRS" => Self::Reservoirs,
            "TANKS" => Self::Tanks,
            "PIPES" => Self::Pipes,
            "PUMPS" => Self::Pumps,
            "VALVES" => Self::Valves,
            "CURVES" => Self::Curves,
            "PATTERNS" => Self::Patterns,
            "DEMANDS" => Self::Demands,
            "STATUS" => Self::Status,
            "COORDINATES" => Self::Coordinates,
            "OPTIONS" => Self::Options,
            "TIMES" => Self::Times,
            "END" => Self::End,
            _ => Self::Unknown,
        }
    }
}

/// A data line with its 1-based line number.
struct Row<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

impl Row<'_> {
    fn err(&self, message: impl Into<String>) -> InpError {
        InpError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn arity(&self, min: usize, max: usize, what: &str) -> Result<(), InpError> {
        let n = self.fields.len();
        if n < min || n > max {
            let expect = if min == max { format!("{min}") } else { format!("{min}-{max}") };
            return Err(self.err(format!("{what} row needs {expect} fields, found {n}")));
        }
        Ok(())
    }

    fn num(&self, i: usize) -> Result<f64, InpError> {
        let s = self.fields[i];
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(format!("cannot parse '{s}' as a number")))?;
        if !v.is_finite() {
            return Err(self.err(format!("'{s}' is not a finite number")));
        }
        Ok(v)
    }

    fn opt(&self, i: usize) -> Option<&str> {
        self.fields.get(i).copied().filter(|s| *s != "*")
    }
}

fn rows_of(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split(';').next().unwrap_or("").trim()))
        .collect()
}

#[derive(Default)]
struct Raw<'a> {
    title: Vec<String>,
    sections: Vec<(Section, Row<'a>)>,
}

/// Parses INP text and validates the resulting network.
pub fn parse_inp(text: &str) -> Result<ParsedInp, InpError> {
    let parsed = parse_inp_unvalidated(text)?;
    let violations = validate_network(&parsed.network);
    if !violations.is_empty() {
        return Err(InpError::Invalid(violations));
    }
    Ok(parsed)
}

/// Parses INP text without running [`validate_network`]. Syntax errors,
/// duplicate ids and dangling references are still reported.
pub fn parse_inp_unvalidated(text: &str) -> Result<ParsedInp, InpError> {
    let mut warnings = Vec::new();
    let mut raw = Raw::default();
    let mut section: Option<Section> = None;
    for (line, content) in rows_of(text) {
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            let Some(name) = content.strip_prefix('[').and_then(|c| c.strip_suffix(']')) else {
                return Err(InpError::Syntax {
                    line,
                    message: format!("malformed section header '{content}'"),
                });
            };
            let s = Section::parse(name.trim());
            if s == Section::Unknown {
                warnings.push(format!("line {line}: skipping unsupported section [{}]", name.trim()));
            }
            section = Some(s);
            continue;
        }
        match section {
            None => {
                return Err(InpError::Syntax {
                    line,
                    message: "data before the first section header".into(),
                })
            }
            Some(Section::Title) => raw.title.push(content.to_string()),
            Some(Section::Unknown) | Some(Section::End) => {}
            Some(s) => raw.sections.push((
                s,
                Row {
                    line,
                    fields: content.split_whitespace().collect(),
                },
            )),
        }
    }

    // Options first: they fix the unit system for every other section.
    let mut flow_units = FlowUnits::Gpm;
    let mut demand_multiplier = 1.0;
    let mut default_pattern: Option<(String, usize)> = None;
    let mut start_hour = 0usize;
    for (s, row) in &raw.sections {
        match s {
            Section::Options => parse_option(row, &mut flow_units, &mut demand_multiplier, &mut default_pattern, &mut warnings)?,
            Section::Times => parse_time(row, &mut start_hour, &mut warnings)?,
            _ => {}
        }
    }
    let u = Units::new(flow_units);

    let mut net = Network::new();
    net.title = raw.title.join("\n");
    net.horizon_start_hour = start_hour;

    // node id -> defining line, shared by every node kind
    let mut node_lines: HashMap<String, usize> = HashMap::new();
    let mut link_lines: HashMap<String, usize> = HashMap::new();
    let mut curves: IndexMap<String, Vec<(f64, f64)>> = IndexMap::new();
    let mut pattern_refs: Vec<(String, usize)> = Vec::new();
    let mut endpoint_refs: Vec<(String, usize)> = Vec::new();

    let claim = |map: &mut HashMap<String, usize>, row: &Row, id: &str, what: &str| -> Result<(), InpError> {
        if let Some(prev) = map.get(id) {
            return Err(row.err(format!("duplicate {what} id '{id}' (first defined on line {prev})")));
        }
        map.insert(id.to_string(), row.line);
        Ok(())
    };

    for (s, row) in &raw.sections {
        match s {
            Section::Junctions => {
                row.arity(2, 4, "junction")?;
                let id = row.fields[0];
                claim(&mut node_lines, row, id, "node")?;
                let demand = if row.fields.len() > 2 { row.num(2)? } else { 0.0 };
                let pattern = row.opt(3).map(str::to_string);
                if let Some(p) = &pattern {
                    pattern_refs.push((p.clone(), row.line));
                }
                net.junctions.insert(
                    id.into(),
                    Junction {
                        id: id.into(),
                        elevation: row.num(1)? * u.length,
                        base_demand: demand * u.flow * demand_multiplier,
                        pattern,
                    },
                );
            }
            Section::Reservoirs => {
                row.arity(2, 3, "reservoir")?;
                let id = row.fields[0];
                claim(&mut node_lines, row, id, "node")?;
                if row.opt(2).is_some() {
                    warnings.push(format!("line {}: reservoir head patterns are ignored", row.line));
                }
                net.reservoirs.insert(
                    id.into(),
                    InjectionPoint {
                        id: id.into(),
                        head: row.num(1)? * u.length,
                        transmission_ei: 0.0,
                        treatment_ei: 0.0,
                        target_fraction: 0.0,
                    },
                );
            }
            Section::Tanks => {
                row.arity(6, 8, "tank")?;
                let id = row.fields[0];
                claim(&mut node_lines, row, id, "node")?;
                if row.opt(7).is_some() {
                    return Err(row.err("tank volume curves are not supported"));
                }
                if row.fields.len() > 6 && row.num(6)? != 0.0 {
                    warnings.push(format!("line {}: tank minimum volume is ignored", row.line));
                }
                net.tanks.insert(
                    id.into(),
                    Tank {
                        id: id.into(),
                        elevation: row.num(1)? * u.length,
                        init_level: row.num(2)? * u.length,
                        min_level: row.num(3)? * u.length,
                        max_level: row.num(4)? * u.length,
                        diameter: row.num(5)? * u.length,
                    },
                );
            }
            _ => {}
        }
    }

    for (s, row) in &raw.sections {
        match s {
            Section::Pipes => {
                row.arity(6, 8, "pipe")?;
                let id = row.fields[0];
                claim(&mut link_lines, row, id, "link")?;
                endpoint_refs.push((row.fields[1].into(), row.line));
                endpoint_refs.push((row.fields[2].into(), row.line));
                if row.fields.len() > 6 && row.num(6)? != 0.0 {
                    warnings.push(format!("line {}: pipe minor loss coefficient is ignored", row.line));
                }
                let (status, check_valve) = match row.fields.get(7).map(|s| s.to_ascii_uppercase()) {
                    None => (LinkStatus::Open, false),
                    Some(s) if s == "OPEN" => (LinkStatus::Open, false),
                    Some(s) if s == "CLOSED" => (LinkStatus::Closed, false),
                    Some(s) if s == "CV" => (LinkStatus::Open, true),
                    Some(s) => return Err(row.err(format!("unknown pipe status '{s}'"))),
                };
                net.pipes.insert(
                    id.into(),
                    Pipe {
                        id: id.into(),
                        from: row.fields[1].into(),
                        to: row.fields[2].into(),
                        length: row.num(3)? * u.length,
                        diameter: row.num(4)? * u.diameter,
                        roughness: row.num(5)?,
                        check_valve,
                        status,
                    },
                );
            }
            Section::Curves => {
                row.arity(3, 3, "curve")?;
                curves
                    .entry(row.fields[0].to_string())
                    .or_default()
                    .push((row.num(1)?, row.num(2)?));
            }
            Section::Patterns => {
                if row.fields.len() < 2 {
                    return Err(row.err("pattern row needs an id and at least one multiplier"));
                }
                let id = row.fields[0];
                let mut values = Vec::with_capacity(row.fields.len() - 1);
                for i in 1..row.fields.len() {
                    values.push(row.num(i)?);
                }
                net.patterns
                    .entry(id.into())
                    .or_insert_with(|| Pattern {
                        id: id.into(),
                        multipliers: Vec::new(),
                    })
                    .multipliers
                    .extend(values);
            }
            Section::Coordinates => {
                row.arity(3, 3, "coordinate")?;
                net.coordinates.insert(row.fields[0].into(), (row.num(1)?, row.num(2)?));
            }
            _ => {}
        }
    }

    let mut pump_curve_refs: Vec<(String, String, usize)> = Vec::new();
    for (s, row) in &raw.sections {
        match s {
            Section::Pumps => {
                if row.fields.len() < 5 || row.fields.len() % 2 == 0 {
                    return Err(row.err(format!(
                        "pump row needs id, two nodes and keyword/value pairs, found {} fields",
                        row.fields.len()
                    )));
                }
                let id = row.fields[0];
                claim(&mut link_lines, row, id, "link")?;
                endpoint_refs.push((row.fields[1].into(), row.line));
                endpoint_refs.push((row.fields[2].into(), row.line));
                let mut model = None;
                for pair in (3..row.fields.len()).step_by(2) {
                    let key = row.fields[pair].to_ascii_uppercase();
                    match key.as_str() {
                        "HEAD" => {
                            pump_curve_refs.push((id.into(), row.fields[pair + 1].into(), row.line));
                        }
                        "POWER" => {
                            let p = row.num(pair + 1)? * u.power;
                            if p <= 0.0 {
                                return Err(row.err("pump power must be positive"));
                            }
                            model = Some(PumpModel::ConstantPower {
                                power_kw: p,
                                efficiency: DEFAULT_BEP_EFF,
                            });
                        }
                        "SPEED" => {
                            if row.num(pair + 1)? != 1.0 {
                                warnings.push(format!("line {}: pump speed settings are ignored", row.line));
                            }
                        }
                        "PATTERN" => {
                            warnings.push(format!("line {}: pump speed patterns are ignored", row.line));
                        }
                        other => return Err(row.err(format!("unknown pump keyword '{other}'"))),
                    }
                }
                let placeholder = PumpModel::ConstantPower {
                    power_kw: 0.0,
                    efficiency: DEFAULT_BEP_EFF,
                };
                net.pumps.insert(
                    id.into(),
                    Pump {
                        id: id.into(),
                        from: row.fields[1].into(),
                        to: row.fields[2].into(),
                        model: model.unwrap_or(placeholder),
                    },
                );
                if model.is_none() && !pump_curve_refs.iter().any(|(p, _, _)| p == id) {
                    return Err(row.err(format!("pump '{id}' has neither HEAD nor POWER")));
                }
            }
            Section::Valves => {
                row.arity(6, 7, "valve")?;
                let id = row.fields[0];
                claim(&mut link_lines, row, id, "link")?;
                endpoint_refs.push((row.fields[1].into(), row.line));
                endpoint_refs.push((row.fields[2].into(), row.line));
                let diameter = row.num(3)? * u.diameter;
                match row.fields[4].to_ascii_uppercase().as_str() {
                    "PRV" => {
                        net.valves.insert(
                            id.into(),
                            Prv {
                                id: id.into(),
                                from: row.fields[1].into(),
                                to: row.fields[2].into(),
                                setting: row.num(5)? * u.pressure,
                                diameter,
                                fixed_status: None,
                            },
                        );
                    }
                    "CV" => {
                        warnings.push(format!(
                            "line {}: check valve '{id}' modelled as a {CV_PIPE_LENGTH} m check-valved pipe",
                            row.line
                        ));
                        net.pipes.insert(
                            id.into(),
                            Pipe {
                                id: id.into(),
                                from: row.fields[1].into(),
                                to: row.fields[2].into(),
                                length: CV_PIPE_LENGTH,
                                diameter,
                                roughness: CV_PIPE_ROUGHNESS,
                                check_valve: true,
                                status: LinkStatus::Open,
                            },
                        );
                    }
                    other => return Err(row.err(format!("unsupported valve type '{other}' (only PRV and CV)"))),
                }
            }
            _ => {}
        }
    }

    for (pump, curve, line) in pump_curve_refs {
        let Some(points) = curves.get(&curve) else {
            return Err(InpError::Syntax {
                line,
                message: format!("pump '{pump}' references undefined curve '{curve}'"),
            });
        };
        let points: Vec<(f64, f64)> = points.iter().map(|(q, h)| (q * u.flow, h * u.length)).collect();
        let model = match points.len() {
            1 => reconstruct_pump_curves(points[0].0, points[0].1, DEFAULT_BEP_EFF).map(PumpModel::Bep),
            3 => PowerHeadCurve::fit(&points, DEFAULT_BEP_EFF).map(PumpModel::PowerCurve),
            n => Err(crate::network::CurveError::UnsupportedPointCount(n)),
        }
        .map_err(|e| InpError::Syntax {
            line,
            message: format!("pump '{pump}' curve '{curve}': {e}"),
        })?;
        net.pumps[&pump].model = model;
    }

    // Demands and status override values given earlier.
    let mut demand_seen: HashMap<String, usize> = HashMap::new();
    for (s, row) in &raw.sections {
        match s {
            Section::Demands => {
                row.arity(2, 3, "demand")?;
                let id = row.fields[0];
                let Some(j) = net.junctions.get_mut(id) else {
                    return Err(row.err(format!("demand for unknown junction '{id}'")));
                };
                if let Some(prev) = demand_seen.insert(id.into(), row.line) {
                    return Err(row.err(format!(
                        "junction '{id}' already has a demand category on line {prev}; only one is supported"
                    )));
                }
                j.base_demand = row.num(1)? * u.flow * demand_multiplier;
                j.pattern = row.opt(2).map(str::to_string);
                if let Some(p) = &j.pattern {
                    pattern_refs.push((p.clone(), row.line));
                }
            }
            Section::Status => {
                row.arity(2, 2, "status")?;
                let id = row.fields[0];
                let value = row.fields[1].to_ascii_uppercase();
                let status = match value.as_str() {
                    "OPEN" => LinkStatus::Open,
                    "CLOSED" => LinkStatus::Closed,
                    _ => {
                        if row.num(1).is_ok() {
                            warnings.push(format!("line {}: numeric status settings are ignored", row.line));
                            continue;
                        }
                        return Err(row.err(format!("unknown status '{}'", row.fields[1])));
                    }
                };
                if let Some(p) = net.pipes.get_mut(id) {
                    p.status = status;
                } else if let Some(v) = net.valves.get_mut(id) {
                    v.fixed_status = Some(status);
                } else if net.pumps.contains_key(id) {
                    warnings.push(format!(
                        "line {}: initial pump status is ignored; the schedule decides",
                        row.line
                    ));
                } else {
                    return Err(row.err(format!("status for unknown link '{id}'")));
                }
            }
            _ => {}
        }
    }

    for (node, line) in &endpoint_refs {
        if !node_lines.contains_key(node) {
            return Err(InpError::Syntax {
                line: *line,
                message: format!("link references undefined node '{node}'"),
            });
        }
    }
    if let Some((p, line)) = &default_pattern {
        pattern_refs.push((p.clone(), *line));
        net.default_pattern = Some(p.clone());
    }
    for (p, line) in &pattern_refs {
        if !net.patterns.contains_key(p) {
            return Err(InpError::Syntax {
                line: *line,
                message: format!("undefined pattern '{p}'"),
            });
        }
    }
    // EPANET's implicit pattern "1" is the default when no Pattern option is set.
    if net.default_pattern.is_none() && net.patterns.contains_key("1") {
        net.default_pattern = Some("1".into());
    }
    for id in net.coordinates.keys() {
        if !node_lines.contains_key(id) {
            warnings.push(format!("coordinates given for unknown node '{id}'"));
        }
    }

    // Source energy data is not part of INP; shares default to equal.
    let n_res = net.reservoirs.len();
    for r in net.reservoirs.values_mut() {
        r.target_fraction = 1.0 / n_res as f64;
    }

    Ok(ParsedInp { network: net, warnings })
}

/// Length and roughness of the short pipe standing in for a `CV` valve.
const CV_PIPE_LENGTH: f64 = 1.0;
const CV_PIPE_ROUGHNESS: f64 = 150.0;

fn parse_option(
    row: &Row,
    flow_units: &mut FlowUnits,
    demand_multiplier: &mut f64,
    default_pattern: &mut Option<(String, usize)>,
    warnings: &mut Vec<String>,
) -> Result<(), InpError> {
    let key = row.fields[0].to_ascii_uppercase();
    let value = |i: usize| row.fields.get(i).copied().ok_or_else(|| row.err(format!("option {key} has no value")));
    match key.as_str() {
        "UNITS" => {
            let v = value(1)?;
            *flow_units = FlowUnits::parse(v).ok_or_else(|| row.err(format!("unknown flow units '{v}'")))?;
        }
        "HEADLOSS" => {
            let v = value(1)?.to_ascii_uppercase();
            if v != "H-W" {
                return Err(row.err(format!("head loss formula '{v}' is not supported (only H-W)")));
            }
        }
        "PATTERN" => *default_pattern = Some((value(1)?.to_string(), row.line)),
        "DEMAND" if row.fields.get(1).is_some_and(|s| s.eq_ignore_ascii_case("MULTIPLIER")) => {
            *demand_multiplier = row.num(2)?;
        }
        _ => warnings.push(format!("line {}: option '{}' ignored", row.line, row.fields.join(" "))),
    }
    Ok(())
}

/// Parses an EPANET clock time such as `6`, `6:00`, `6 AM` or `18:00 PM`
/// to a whole hour of the day.
fn clock_hour(parts: &[&str]) -> Option<usize> {
    let first = parts.first()?;
    let hours: f64 = match first.split_once(':') {
        Some((h, rest)) => {
            let mut v: f64 = h.parse().ok()?;
            let mut parts = rest.split(':');
            if let Some(m) = parts.next() {
                v += m.parse::<f64>().ok()? / 60.0;
            }
            v
        }
        None => first.parse().ok()?,
    };
    let mut h = hours;
    match parts.get(1).map(|s| s.to_ascii_uppercase()) {
        Some(s) if s == "AM" && h >= 12.0 => h -= 12.0,
        Some(s) if s == "PM" && h < 12.0 => h += 12.0,
        _ => {}
    }
    (h.fract() == 0.0 && (0.0..24.0).contains(&h)).then_some(h as usize)
}

fn parse_time(row: &Row, start_hour: &mut usize, warnings: &mut Vec<String>) -> Result<(), InpError> {
    let upper: Vec<String> = row.fields.iter().map(|s| s.to_ascii_uppercase()).collect();
    if upper.len() >= 3 && upper[0] == "START" && upper[1] == "CLOCKTIME" {
        *start_hour = clock_hour(&row.fields[2..])
            .ok_or_else(|| row.err(format!("cannot parse start clock time '{}'", row.fields[2..].join(" "))))?;
    } else if matches_horizon(&upper) {
        // the fixed 24 x 1 h horizon already
    } else {
        warnings.push(format!("line {}: time option '{}' ignored", row.line, row.fields.join(" ")));
    }
    Ok(())
}

/// Whether a [TIMES] row restates the fixed 24-hour, hourly horizon.
fn matches_horizon(upper: &[String]) -> bool {
    let hours = |v: &str| -> Option<f64> {
        match v.split_once(':') {
            Some((h, m)) => Some(h.parse::<f64>().ok()? + m.split(':').next()?.parse::<f64>().ok()? / 60.0),
            None => v.parse().ok(),
        }
    };
    let (key, value) = match upper {
        [k, v] => (k.as_str(), v),
        [k1, k2, v, ..] if k1 == "HYDRAULIC" || k1 == "PATTERN" || k1 == "REPORT" => {
            if k2 != "TIMESTEP" {
                return false;
            }
            (k1.as_str(), v)
        }
        _ => return false,
    };
    let unit_ok = upper.len() <= 3 || matches!(upper.last().map(String::as_str), Some("HOURS" | "HOUR" | "HRS"));
    match (key, hours(value)) {
        ("DURATION", Some(h)) => h == 24.0,
        ("HYDRAULIC" | "PATTERN" | "REPORT", Some(h)) => h == 1.0 && unit_ok,
        _ => false,
    }
}

/// Writes `net` as INP text in CMH units (lengths in m, diameters in mm).
///
/// Energy-intensity and target-fraction data are not representable in INP
/// and are not written.
pub fn emit_inp(net: &Network) -> String {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "[TITLE]");
    for l in net.title.lines() {
        let _ = writeln!(w, "{l}");
    }
    let _ = writeln!(w, "\n[JUNCTIONS]");
    for j in net.junctions.values() {
        let _ = write!(w, "{} {} {}", j.id, j.elevation, j.base_demand);
        if let Some(p) = &j.pattern {
            let _ = write!(w, " {p}");
        }
        let _ = writeln!(w);
    }
    let _ = writeln!(w, "\n[RESERVOIRS]");
    for r in net.reservoirs.values() {
        let _ = writeln!(w, "{} {}", r.id, r.head);
    }
    let _ = writeln!(w, "\n[TANKS]");
    for t in net.tanks.values() {
        let _ = writeln!(
            w,
            "{} {} {} {} {} {} 0",
            t.id, t.elevation, t.init_level, t.min_level, t.max_level, t.diameter
        );
    }
    let _ = writeln!(w, "\n[PIPES]");
    for p in net.pipes.values() {
        let status = if p.check_valve {
            "CV"
        } else if p.status == LinkStatus::Closed {
            "Closed"
        } else {
            "Open"
        };
        let _ = writeln!(
            w,
            "{} {} {} {} {} {} 0 {}",
            p.id,
            p.from,
            p.to,
            p.length,
            p.diameter / MM_TO_M,
            p.roughness,
            status
        );
    }
    let mut curves = String::new();
    let _ = writeln!(w, "\n[PUMPS]");
    for p in net.pumps.values() {
        match p.model {
            PumpModel::Bep(c) => {
                let _ = writeln!(w, "{} {} {} HEAD C_{}", p.id, p.from, p.to, p.id);
                let _ = writeln!(curves, "C_{} {} {}", p.id, c.bep_flow, c.bep_head);
            }
            PumpModel::PowerCurve(c) => {
                let _ = writeln!(w, "{} {} {} HEAD C_{}", p.id, p.from, p.to, p.id);
                let q2 = 2.0 * c.design_flow;
                let _ = writeln!(curves, "C_{} 0 {}", p.id, c.shutoff);
                let _ = writeln!(curves, "C_{} {} {}", p.id, c.design_flow, c.design_head);
                let _ = writeln!(curves, "C_{} {} {}", p.id, q2, c.head_at(q2));
            }
            PumpModel::ConstantPower { power_kw, .. } => {
                let _ = writeln!(w, "{} {} {} POWER {}", p.id, p.from, p.to, power_kw);
            }
        }
    }
    let _ = writeln!(w, "\n[VALVES]");
    for v in net.valves.values() {
        let _ = writeln!(
            w,
            "{} {} {} {} PRV {} 0",
            v.id,
            v.from,
            v.to,
            v.diameter / MM_TO_M,
            v.setting
        );
    }
    let _ = writeln!(w, "\n[STATUS]");
    for v in net.valves.values() {
        if let Some(st) = v.fixed_status {
            let _ = writeln!(w, "{} {}", v.id, if st == LinkStatus::Open { "Open" } else { "Closed" });
        }
    }
    let _ = writeln!(w, "\n[CURVES]\n{curves}");
    let _ = writeln!(w, "[PATTERNS]");
    for p in net.patterns.values() {
        for chunk in p.multipliers.chunks(6) {
            let _ = write!(w, "{}", p.id);
            for m in chunk {
                let _ = write!(w, " {m}");
            }
            let _ = writeln!(w);
        }
    }
    let _ = writeln!(w, "\n[COORDINATES]");
    for (id, (x, y)) in &net.coordinates {
        let _ = writeln!(w, "{id} {x} {y}");
    }
    let _ = writeln!(w, "\n[OPTIONS]\nUnits CMH\nHeadloss H-W");
    if let Some(p) = &net.default_pattern {
        let _ = writeln!(w, "Pattern {p}");
    }
    let _ = writeln!(
        w,
        "\n[TIMES]\nDuration {HORIZON_HOURS}:00\nStart ClockTime {}:00\n\n[END]",
        net.horizon_start_hour
    );
    s
}
