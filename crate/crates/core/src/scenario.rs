//! Scenario files: prices, source energy data, sensitivity multipliers and
//! optimizer settings layered on top of a network.
//!
//! ```text
//! [scenario]
//! name = base
//! seed = 42
//! start_hour = 0
//! demand_multiplier = 1.0
//! roughness_multiplier = 1.0
//! price_series = EP0
//!
//! [prices]
//! EP0 = 0.10, 0.10, ... (24 values, currency per kWh)
//!
//! [sources]
//! ; id = transmission EI, treatment EI, target fraction
//! I1 = 0.30, 0.10, 0.5
//!
//! [elevation_offsets]
//! J3, J4 = 9.14
//!
//! [ga]
//! population = 100
//!
//! [perturbation]
//! levels = 0.1, 0.2, 0.4
//! ```

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hydraulics::BepSampling;
use crate::network::{Network, PriceSeries, HORIZON_HOURS};
use crate::units::MIN_PRESSURE_M;

const FRACTION_SUM_TOL: f64 = 1e-9;

/// Genetic-algorithm settings and fitness constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub elites: usize,
    pub parent_pool: usize,
    pub mutation_prob: f64,
    /// Inclusive range of pumps changed by one mutation.
    pub mutation_pumps: (usize, usize),
    /// Inclusive range of adjacent hours changed per mutated pump.
    pub mutation_steps: (usize, usize),
    /// Pressure below which the pressure penalty applies, m.
    pub min_pressure_m: f64,
    pub fraction_tolerance: f64,
    pub fraction_weight: f64,
    pub pressure_weight: f64,
    pub tank_offset: f64,
    /// Square `p_min - p_low` even when it is negative.
    pub literal_pressure_penalty: bool,
    /// Random schedules tried per population slot before giving up.
    pub init_budget_factor: usize,
    /// Parent pairs tried for one offspring slot before copying a parent.
    pub max_offspring_attempts: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 500,
            generations: 500,
            elites: 5,
            parent_pool: 250,
            mutation_prob: 0.8,
            mutation_pumps: (1, 4),
            mutation_steps: (1, 6),
            min_pressure_m: MIN_PRESSURE_M,
            fraction_tolerance: 0.02,
            fraction_weight: 250_000.0,
            pressure_weight: 10.0,
            tank_offset: 0.2,
            literal_pressure_penalty: false,
            init_budget_factor: 100,
            max_offspring_attempts: 200,
        }
    }
}

impl GaConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.population == 0 || self.generations == 0 {
            return Err("population and generations must be positive".into());
        }
        if !(self.elites < self.parent_pool && self.parent_pool <= self.population) {
            return Err(format!(
                "need elites < parent_pool <= population, got {} / {} / {}",
                self.elites, self.parent_pool, self.population
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(format!("mutation_prob must lie in [0, 1], got {}", self.mutation_prob));
        }
        let (a, b) = self.mutation_pumps;
        let (c, d) = self.mutation_steps;
        if a == 0 || a > b || c == 0 || c > d || d > HORIZON_HOURS {
            return Err("mutation ranges must be non-empty and start at 1 or more".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub n_consumers: usize,
    pub levels: Vec<f64>,
    pub repeats: usize,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            n_consumers: 5,
            levels: vec![0.10, 0.20, 0.40],
            repeats: 10,
        }
    }
}

/// Energy data and planned share of one injection point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub transmission_ei: f64,
    pub treatment_ei: f64,
    pub target_fraction: f64,
}

/// Optional pump-curve reconstruction before optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BepSpec {
    pub samples: usize,
    pub sampling: BepSampling,
    pub efficiency: f64,
}

impl Default for BepSpec {
    fn default() -> Self {
        Self {
            samples: 1000,
            sampling: BepSampling::default(),
            efficiency: crate::network::curves::DEFAULT_BEP_EFF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub seed: u64,
    /// Overrides the network's start clock hour when set.
    pub start_hour: Option<usize>,
    pub demand_multiplier: f64,
    pub roughness_multiplier: f64,
    /// Series used for the electricity cost.
    pub price_series: Option<String>,
    /// Every series defined in the file, in file order.
    pub prices: IndexMap<String, PriceSeries>,
    pub sources: IndexMap<String, SourceSpec>,
    /// Node sets and the elevation offset (m) applied to each.
    pub elevation_offsets: Vec<(Vec<String>, f64)>,
    pub ga: GaConfig,
    pub perturbation: Option<PerturbationSpec>,
    pub bep: Option<BepSpec>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            name: "base".into(),
            seed: 0,
            start_hour: None,
            demand_multiplier: 1.0,
            roughness_multiplier: 1.0,
            price_series: None,
            prices: IndexMap::new(),
            sources: IndexMap::new(),
            elevation_offsets: Vec::new(),
            ga: GaConfig::default(),
            perturbation: None,
            bep: None,
        }
    }
}

impl ScenarioSpec {
    /// The active price series, if one is defined.
    pub fn active_prices(&self) -> Option<&PriceSeries> {
        self.price_series.as_ref().and_then(|id| self.prices.get(id))
    }

    /// Pre-injection energy intensity per configured source, kWh/m³.
    pub fn pre_injection_eis(&self) -> IndexMap<String, f64> {
        self.sources
            .iter()
            .map(|(id, s)| (id.clone(), s.transmission_ei + s.treatment_ei))
            .collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("source target fractions sum to {0}, expected 1")]
    FractionSum(f64),
    #[error("price series '{0}' is not defined")]
    UnknownSeries(String),
    #[error("scenario names unknown node '{0}'")]
    UnknownNode(String),
    #[error("scenario names unknown injection point '{0}'")]
    UnknownSource(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn syntax(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Syntax {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ScenarioError> {
    v.trim()
        .parse()
        .map_err(|_| syntax(line, format!("cannot parse '{}' for {key}", v.trim())))
}

fn finite(line: usize, key: &str, v: &str) -> Result<f64, ScenarioError> {
    let x: f64 = num(line, key, v)?;
    if !x.is_finite() {
        return Err(syntax(line, format!("{key} must be finite")));
    }
    Ok(x)
}

fn list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ScenarioError> {
    v.split(',').map(|x| finite(line, key, x)).collect()
}

fn flag(line: usize, key: &str, v: &str) -> Result<bool, ScenarioError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(syntax(line, format!("{key} expects true/false, got '{other}'"))),
    }
}

/// Parses a scenario file. Omitted keys keep their defaults.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let mut spec = ScenarioSpec::default();
    let mut section = String::new();
    let mut series_line = 0;
    let mut perturbation: Option<PerturbationSpec> = None;
    let mut bep: Option<BepSpec> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, "malformed section header"))?
                .trim()
                .to_ascii_lowercase();
            match name.as_str() {
                "scenario" | "prices" | "sources" | "elevation_offsets" | "ga" => {}
                "perturbation" => {
                    perturbation.get_or_insert_with(PerturbationSpec::default);
                }
                "bep" => {
                    bep.get_or_insert_with(BepSpec::default);
                }
                other => return Err(syntax(line, format!("unknown section [{other}]"))),
            }
            section = name;
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        let unknown = || syntax(line, format!("unknown key '{key}' in [{section}]"));
        match section.as_str() {
            "scenario" => match key {
                "name" => spec.name = value.to_string(),
                "seed" => spec.seed = num(line, key, value)?,
                "start_hour" => {
                    let h: usize = num(line, key, value)?;
                    if h >= HORIZON_HOURS {
                        return Err(syntax(line, "start_hour must lie in 0-23"));
                    }
                    spec.start_hour = Some(h);
                }
                "demand_multiplier" => spec.demand_multiplier = finite(line, key, value)?,
                "roughness_multiplier" => spec.roughness_multiplier = finite(line, key, value)?,
                "price_series" => {
                    spec.price_series = Some(value.to_string());
                    series_line = line;
                }
                _ => return Err(unknown()),
            },
            "prices" => {
                let prices = list(line, key, value)?;
                if prices.len() != HORIZON_HOURS {
                    return Err(syntax(
                        line,
                        format!("price series '{key}' has {} values, expected {HORIZON_HOURS}", prices.len()),
                    ));
                }
                if spec.prices.contains_key(key) {
                    return Err(syntax(line, format!("duplicate price series '{key}'")));
                }
                spec.prices.insert(
                    key.to_string(),
                    PriceSeries {
                        id: key.to_string(),
                        prices,
                    },
                );
            }
            "sources" => {
                let v = list(line, key, value)?;
                let [t, r, f] = v[..] else {
                    return Err(syntax(line, "source entry needs ei_trans, ei_treat, target_fraction"));
                };
                if t < 0.0 || r < 0.0 {
                    return Err(syntax(line, "energy intensities must be non-negative"));
                }
                if !(0.0..=1.0).contains(&f) {
                    return Err(syntax(line, "target fraction must lie in [0, 1]"));
                }
                spec.sources.insert(
                    key.to_string(),
                    SourceSpec {
                        transmission_ei: t,
                        treatment_ei: r,
                        target_fraction: f,
                    },
                );
            }
            "elevation_offsets" => {
                let nodes: Vec<String> = key
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if nodes.is_empty() {
                    return Err(syntax(line, "elevation offset names no nodes"));
                }
                spec.elevation_offsets.push((nodes, finite(line, key, value)?));
            }
            "ga" => {
                let ga = &mut spec.ga;
                match key {
                    "population" => ga.population = num(line, key, value)?,
                    "generations" => ga.generations = num(line, key, value)?,
                    "elites" => ga.elites = num(line, key, value)?,
                    "parent_pool" => ga.parent_pool = num(line, key, value)?,
                    "mutation_prob" => ga.mutation_prob = finite(line, key, value)?,
                    "mutation_pumps_max" => ga.mutation_pumps.1 = num(line, key, value)?,
                    "mutation_steps_max" => ga.mutation_steps.1 = num(line, key, value)?,
                    "min_pressure_m" => ga.min_pressure_m = finite(line, key, value)?,
                    "fraction_tolerance" => ga.fraction_tolerance = finite(line, key, value)?,
                    "fraction_weight" => ga.fraction_weight = finite(line, key, value)?,
                    "pressure_weight" => ga.pressure_weight = finite(line, key, value)?,
                    "tank_offset" => ga.tank_offset = finite(line, key, value)?,
                    "literal_pressure_penalty" => ga.literal_pressure_penalty = flag(line, key, value)?,
                    "init_budget_factor" => ga.init_budget_factor = num(line, key, value)?,
                    "max_offspring_attempts" => ga.max_offspring_attempts = num(line, key, value)?,
                    _ => return Err(unknown()),
                }
            }
            "perturbation" => {
                let p = perturbation.get_or_insert_with(PerturbationSpec::default);
                match key {
                    "n_consumers" => p.n_consumers = num(line, key, value)?,
                    "levels" => {
                        p.levels = list(line, key, value)?;
                        if p.levels.iter().any(|l| !(0.0..1.0).contains(l)) {
                            return Err(syntax(line, "perturbation levels must lie in [0, 1)"));
                        }
                    }
                    "repeats" => {
                        p.repeats = num(line, key, value)?;
                        if p.repeats == 0 {
                            return Err(syntax(line, "repeats must be at least 1"));
                        }
                    }
                    _ => return Err(unknown()),
                }
            }
            "bep" => {
                let b = bep.get_or_insert_with(BepSpec::default);
                match key {
                    "samples" => b.samples = num(line, key, value)?,
                    "demand_min" => b.sampling.demand_min = finite(line, key, value)?,
                    "demand_max" => b.sampling.demand_max = finite(line, key, value)?,
                    "randomize_levels" => b.sampling.randomize_levels = flag(line, key, value)?,
                    "efficiency" => b.efficiency = finite(line, key, value)?,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(syntax(line, "entry outside of any section")),
        }
    }

    if spec.demand_multiplier <= 0.0 || spec.roughness_multiplier <= 0.0 {
        return Err(ScenarioError::Invalid("multipliers must be positive".into()));
    }
    match &spec.price_series {
        Some(id) if !spec.prices.contains_key(id) => {
            return Err(ScenarioError::Syntax {
                line: series_line,
                message: format!("price series '{id}' is not defined"),
            })
        }
        None => spec.price_series = spec.prices.keys().next().cloned(),
        _ => {}
    }
    if !spec.sources.is_empty() {
        let sum: f64 = spec.sources.values().map(|s| s.target_fraction).sum();
        if (sum - 1.0).abs() > FRACTION_SUM_TOL {
            return Err(ScenarioError::FractionSum(sum));
        }
    }
    spec.ga.check().map_err(ScenarioError::Invalid)?;
    spec.perturbation = perturbation;
    spec.bep = bep;
    Ok(spec)
}

/// Applies the scenario's transformations to a copy of `net`.
///
/// Demands are scaled, Hazen-Williams coefficients become `C / m` for a
/// roughness multiplier `m`, node elevations are offset, source data and
/// the start hour are overridden where given.
pub fn apply_scenario(net: &Network, spec: &ScenarioSpec) -> Result<Network, ScenarioError> {
    let mut out = net.clone();
    if spec.demand_multiplier != 1.0 {
        for j in out.junctions.values_mut() {
            j.base_demand *= spec.demand_multiplier;
        }
    }
    if spec.roughness_multiplier != 1.0 {
        for p in out.pipes.values_mut() {
            p.roughness /= spec.roughness_multiplier;
        }
    }
    for (nodes, offset) in &spec.elevation_offsets {
        for id in nodes {
            if let Some(j) = out.junctions.get_mut(id) {
                j.elevation += offset;
            } else if let Some(t) = out.tanks.get_mut(id) {
                t.elevation += offset;
            } else if let Some(r) = out.reservoirs.get_mut(id) {
                r.head += offset;
            } else {
                return Err(ScenarioError::UnknownNode(id.clone()));
            }
        }
    }
    for (id, s) in &spec.sources {
        let r = out
            .reservoirs
            .get_mut(id)
            .ok_or_else(|| ScenarioError::UnknownSource(id.clone()))?;
        r.transmission_ei = s.transmission_ei;
        r.treatment_ei = s.treatment_ei;
        r.target_fraction = s.target_fraction;
    }
    if let Some(h) = spec.start_hour {
        out.horizon_start_hour = h;
    }
    Ok(out)
}
