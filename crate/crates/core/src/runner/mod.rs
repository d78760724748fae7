//! End-to-end runs: scenario pipeline, sensitivity sweep and demand
//! perturbation analysis.

pub mod output;
pub mod perturb;
pub mod sweep;

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::backtrack::{
    backtrack, daily_average_mei, energy_closure, BacktrackError, BacktrackOptions, DailyMei, EnergyClosure,
    MeiReport,
};
use crate::ga::{evolve, fitness, FitnessBreakdown, FitnessError, GaError, GenerationStats};
use crate::hydraulics::{apply_bep_curves, estimate_bep, simulate_eps, BepError, SimOptions, SimulationResult, StepFailure};
use crate::inp::{parse_inp, InpError};
use crate::network::Network;
use crate::scenario::{apply_scenario, parse_scenario, ScenarioError, ScenarioSpec};
use crate::schedule::{PumpSchedule, ScheduleError};

pub use output::write_run;
pub use perturb::{run_perturbation, write_perturbation, PerturbationRow, PerturbationRun, PerturbationTable};
pub use sweep::{run_sweep, run_variants, standard_variants, write_comparison, SweepEntry, SweepResult, Variant, VariantChange};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("network: {0}")]
    Network(#[from] InpError),
    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("scenario '{0}': missing price series")]
    MissingPrices(String),
    #[error("schedule: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("pump curves: {0}")]
    Bep(#[from] BepError),
    #[error("optimize: {0}")]
    Optimize(#[from] GaError),
    #[error("simulate: {0}")]
    Simulate(#[from] StepFailure),
    #[error("fitness: {0}")]
    Fitness(#[from] FitnessError),
    #[error("backtrack: {0}")]
    Backtrack(#[from] BacktrackError),
    #[error("write {path}: {message}")]
    Write { path: PathBuf, message: String },
}

pub fn read_file(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates a network file.
pub fn load_network(path: &Path) -> Result<Network, RunError> {
    let parsed = parse_inp(&read_file(path)?)?;
    for w in &parsed.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(parsed.network)
}

/// Reads a scenario file and checks that it can drive a run.
pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, RunError> {
    let spec = parse_scenario(&read_file(path)?)?;
    check_prices(&spec)?;
    Ok(spec)
}

fn check_prices(spec: &ScenarioSpec) -> Result<(), RunError> {
    match spec.active_prices() {
        Some(_) => Ok(()),
        None => Err(RunError::MissingPrices(spec.name.clone())),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub sim: SimOptions,
    pub backtrack: BacktrackOptions,
    /// Evaluate this schedule instead of optimizing one.
    pub schedule: Option<PumpSchedule>,
}

/// Summary statistics of a run, all recomputable from the raw artifacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub feasible: bool,
    pub infeasibility_reason: Option<String>,
    pub fitness: FitnessBreakdown,
    pub generations: usize,
    pub fallback_copies: usize,
    pub total_energy_kwh: f64,
    /// Pump energy per horizon hour, kWh.
    pub hourly_load_kwh: Vec<f64>,
    pub injected_volume_m3: IndexMap<String, f64>,
    pub injected_fractions: IndexMap<String, f64>,
    pub tank_ei_kwh_m3: IndexMap<String, f64>,
    pub mean_daily_mei: Option<f64>,
    pub min_daily_mei: Option<f64>,
    pub max_daily_mei: Option<f64>,
    pub system_mei: Option<f64>,
    pub energy_closure: ClosureSummary,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureSummary {
    #[serde(flatten)]
    pub terms: EnergyClosure,
    pub residual: f64,
    pub relative: f64,
    pub storage_adjusted: f64,
    pub storage_adjusted_relative: f64,
}

impl From<EnergyClosure> for ClosureSummary {
    fn from(c: EnergyClosure) -> Self {
        Self {
            terms: c,
            residual: c.residual(),
            relative: c.relative(),
            storage_adjusted: c.storage_adjusted(),
            storage_adjusted_relative: c.storage_adjusted_relative(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub name: String,
    pub spec: ScenarioSpec,
    /// Network after the scenario and any curve reconstruction.
    pub network: Network,
    pub schedule: PumpSchedule,
    pub history: Vec<GenerationStats>,
    pub sim: SimulationResult,
    pub report: MeiReport,
    pub daily: DailyMei,
    pub closure: EnergyClosure,
    pub summary: RunSummary,
}

/// Mean, minimum and maximum of the defined values.
pub fn distribution_stats(values: &[Option<f64>]) -> (Option<f64>, Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.iter().flatten().copied().collect();
    if v.is_empty() {
        return (None, None, None);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (Some(mean), Some(min), Some(max))
}

/// Applies the scenario to `base` and reconstructs pump curves if asked.
pub fn prepare_network(base: &Network, spec: &ScenarioSpec) -> Result<Network, RunError> {
    let mut net = apply_scenario(base, spec)?;
    if let Some(bep) = &spec.bep {
        let estimates = estimate_bep(&net, bep.samples, spec.seed, &bep.sampling)?;
        apply_bep_curves(&mut net, &estimates, bep.efficiency)?;
    }
    Ok(net)
}

/// Full pipeline: scenario, optional curve reconstruction, optimization
/// (unless a schedule is given), simulation and backtracking.
pub fn run_scenario(base: &Network, spec: &ScenarioSpec, opts: &RunOptions) -> Result<RunArtifacts, RunError> {
    check_prices(spec)?;
    let prices = spec.active_prices().expect("checked above");
    let net = prepare_network(base, spec)?;

    let (schedule, history, fallback_copies) = match &opts.schedule {
        Some(s) => {
            s.check_pumps(net.pumps.len())?;
            (s.clone(), Vec::new(), 0)
        }
        None => {
            let out = evolve(&net, prices, &spec.ga, spec.seed)?;
            (out.best.schedule, out.history, out.fallback_copies)
        }
    };

    let sim = simulate_eps(&net, &schedule, &opts.sim)?;
    let fit = fitness(&sim, prices, &net, &spec.ga)?;
    let report = backtrack(&net, &sim, &opts.backtrack)?;
    let daily = daily_average_mei(&report);
    let closure = energy_closure(&report, &sim);

    let (mean, min, max) = distribution_stats(&daily.nodes);
    let layout = &sim.layout;
    let mut warnings = sim.warnings.clone();
    warnings.extend(report.warnings.iter().cloned());
    let summary = RunSummary {
        scenario: spec.name.clone(),
        seed: spec.seed,
        feasible: sim.feasible,
        infeasibility_reason: sim.infeasibility_reason.clone(),
        fitness: fit,
        generations: history.len(),
        fallback_copies,
        total_energy_kwh: sim.total_energy(),
        hourly_load_kwh: sim.energy_per_step.clone(),
        injected_volume_m3: net.reservoirs.keys().cloned().zip(sim.injected_volume.iter().copied()).collect(),
        injected_fractions: net.reservoirs.keys().cloned().zip(sim.injected_fractions()).collect(),
        tank_ei_kwh_m3: (0..layout.n_tanks)
            .map(|n| (layout.node_ids[layout.tank_node(n)].clone(), report.tanks.total_ei(n)))
            .collect(),
        mean_daily_mei: mean,
        min_daily_mei: min,
        max_daily_mei: max,
        system_mei: daily.system,
        energy_closure: closure.into(),
        warnings,
    };

    Ok(RunArtifacts {
        name: spec.name.clone(),
        spec: spec.clone(),
        network: net,
        schedule,
        history,
        sim,
        report,
        daily,
        closure,
        summary,
    })
}

/// Runs a scenario from a network file and a scenario file.
pub fn run_scenario_files(network: &Path, scenario: &Path, opts: &RunOptions) -> Result<RunArtifacts, RunError> {
    let spec = load_scenario(scenario)?;
    let net = load_network(network)?;
    run_scenario(&net, &spec, opts)
}
