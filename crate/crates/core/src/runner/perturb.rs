//! Demand perturbation under a fixed schedule.
//!
//! Randomly chosen consumers have their demand scaled up or down by a
//! level; the base schedule is simulated again and hourly MEI is compared
//! with the base run.

use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{RunArtifacts, RunOptions};
use crate::backtrack::{backtrack, hourly_mei};
use crate::hydraulics::simulate_eps;
use crate::rng::{keyed_rng, purpose};
use crate::scenario::PerturbationSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationRow {
    pub level: f64,
    pub repeat: usize,
    pub node_id: String,
    pub hour: usize,
    pub base_mei: f64,
    pub perturbed_mei: f64,
    pub delta: f64,
    pub delta_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationRun {
    pub level: f64,
    pub repeat: usize,
    /// Perturbed consumers and their demand factors.
    pub consumers: Vec<(String, f64)>,
    /// Set when the perturbed run was infeasible or failed.
    pub failure: Option<String>,
    /// Largest |ΔMEI| at a perturbed consumer, kWh/m³.
    pub max_abs_delta: f64,
    /// Largest |ΔMEI| in percent at any junction.
    pub max_abs_pct_any_node: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PerturbationTable {
    pub rows: Vec<PerturbationRow>,
    pub runs: Vec<PerturbationRun>,
}

impl PerturbationTable {
    /// Median over feasible repeats of the largest deviation at a perturbed
    /// consumer, for one level.
    pub fn median_max_delta(&self, level: f64) -> Option<f64> {
        let mut v: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.level == level && r.failure.is_none())
            .map(|r| r.max_abs_delta)
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
    }

    /// Largest percentage change at any junction over feasible runs of a level.
    pub fn max_pct_any_node(&self, level: f64) -> f64 {
        self.runs
            .iter()
            .filter(|r| r.level == level && r.failure.is_none())
            .map(|r| r.max_abs_pct_any_node)
            .fold(0.0, f64::max)
    }

    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.failure.is_some()).count()
    }
}

#[allow(clippy::too_many_arguments)]
fn one_run(
    base: &RunArtifacts,
    base_hourly: &[Vec<Option<f64>>],
    consumers: &[String],
    n_pick: usize,
    seed: u64,
    (level_index, level): (usize, f64),
    repeat: usize,
    opts: &RunOptions,
) -> (PerturbationRun, Vec<PerturbationRow>) {
    let mut rng = keyed_rng(seed, purpose::PERTURB, level_index as u64, repeat as u64);
    let mut picked = sample(&mut rng, consumers.len(), n_pick.min(consumers.len())).into_vec();
    picked.sort_unstable();
    let chosen: Vec<(String, f64)> = picked
        .iter()
        .map(|&i| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (consumers[i].clone(), 1.0 + sign * level)
        })
        .collect();

    let mut net = base.network.clone();
    for (id, factor) in &chosen {
        if let Some(j) = net.junctions.get_mut(id) {
            j.base_demand *= factor;
        }
    }
    let mut run = PerturbationRun {
        level,
        repeat,
        consumers: chosen.clone(),
        failure: None,
        max_abs_delta: 0.0,
        max_abs_pct_any_node: 0.0,
    };
    let sim = match simulate_eps(&net, &base.schedule, &opts.sim) {
        Ok(sim) if sim.feasible => sim,
        Ok(sim) => {
            run.failure = Some(sim.infeasibility_reason.unwrap_or_else(|| "infeasible".into()));
            return (run, Vec::new());
        }
        Err(e) => {
            run.failure = Some(e.to_string());
            return (run, Vec::new());
        }
    };
    let report = match backtrack(&net, &sim, &opts.backtrack) {
        Ok(r) => r,
        Err(e) => {
            run.failure = Some(e.to_string());
            return (run, Vec::new());
        }
    };
    let hourly = hourly_mei(&report);
    let layout = &report.layout;

    for (hour, row) in hourly.iter().enumerate() {
        for j in 0..layout.n_junctions {
            if let (Some(b), Some(p)) = (base_hourly[hour][j], row[j]) {
                if b > 0.0 {
                    run.max_abs_pct_any_node = run.max_abs_pct_any_node.max(100.0 * ((p - b) / b).abs());
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (id, _) in &chosen {
        let Some(j) = layout.node(id) else { continue };
        for (hour, row) in hourly.iter().enumerate() {
            if let (Some(b), Some(p)) = (base_hourly[hour][j], row[j]) {
                let delta = p - b;
                run.max_abs_delta = run.max_abs_delta.max(delta.abs());
                rows.push(PerturbationRow {
                    level,
                    repeat,
                    node_id: id.clone(),
                    hour,
                    base_mei: b,
                    perturbed_mei: p,
                    delta,
                    delta_pct: if b != 0.0 { 100.0 * delta / b } else { 0.0 },
                });
            }
        }
    }
    (run, rows)
}

/// Repeats the perturbation protocol for every level, reusing the base
/// run's network and schedule. Random choices come from `seed`.
pub fn run_perturbation(base: &RunArtifacts, spec: &PerturbationSpec, seed: u64, opts: &RunOptions) -> PerturbationTable {
    let base_hourly = hourly_mei(&base.report);
    let consumers: Vec<String> = base.network.consumers().map(|j| j.id.clone()).collect();
    let tasks: Vec<(usize, f64, usize)> = spec
        .levels
        .iter()
        .enumerate()
        .flat_map(|(li, &level)| (0..spec.repeats).map(move |r| (li, level, r)))
        .collect();
    let results: Vec<(PerturbationRun, Vec<PerturbationRow>)> = tasks
        .par_iter()
        .map(|&(li, level, r)| {
            one_run(
                base,
                &base_hourly,
                &consumers,
                spec.n_consumers,
                seed,
                (li, level),
                r,
                opts,
            )
        })
        .collect();
    let mut table = PerturbationTable::default();
    for (run, rows) in results {
        if let Some(f) = &run.failure {
            log::warn!("perturbation level {} repeat {}: {f}", run.level, run.repeat);
        }
        table.runs.push(run);
        table.rows.extend(rows);
    }
    table
}

pub fn write_perturbation<W: Write>(table: &PerturbationTable, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "level",
        "repeat",
        "node_id",
        "hour",
        "base_mei",
        "perturbed_mei",
        "delta",
        "delta_pct",
    ])?;
    for r in &table.rows {
        w.write_record([
            r.level.to_string(),
            r.repeat.to_string(),
            r.node_id.clone(),
            r.hour.to_string(),
            r.base_mei.to_string(),
            r.perturbed_mei.to_string(),
            r.delta.to_string(),
            r.delta_pct.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
