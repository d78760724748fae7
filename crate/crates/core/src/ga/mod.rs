//! Genetic-algorithm pump scheduling.
//!
//! Every individual is a feasible 24-hour on/off schedule. Each generation
//! keeps the elites and fills the remaining slots with offspring of
//! rank-selected parents (two-point crossover on the hour axis followed by
//! run mutation). Offspring that fail the hydraulic feasibility gate are
//! redrawn. Each slot draws from its own seeded random stream, so results
//! do not depend on the number of threads.

pub mod fitness;
pub mod operators;

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::hydraulics::{SimOptions, SimulationResult, Simulator, StepFailure};
use crate::network::{Network, PriceSeries};
use crate::rng::{keyed_rng, purpose};
use crate::scenario::GaConfig;
use crate::schedule::PumpSchedule;

pub use fitness::{fitness, FitnessBreakdown, FitnessError};
pub use operators::{crossover_two_point, mutate, random_schedule, select_parent};

#[derive(Debug, Error)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    Config(String),
    #[error("could not find {needed} feasible schedules in {draws} draws (found {found}); most common failure: {reason}")]
    InitBudget {
        needed: usize,
        found: usize,
        draws: usize,
        reason: String,
    },
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error(transparent)]
    Hydraulics(#[from] StepFailure),
}

/// A feasible schedule and its fitness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub schedule: PumpSchedule,
    pub fitness: FitnessBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: FitnessBreakdown,
    pub mean_total: f64,
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Individual,
    /// One entry per generation, starting with the initial population.
    pub history: Vec<GenerationStats>,
    /// Final population, best first.
    pub population: Vec<Individual>,
    /// Offspring slots filled by copying a parent after every redraw failed.
    pub fallback_copies: usize,
}

/// Simulates and scores schedules for one network and tariff.
pub struct Evaluator<'a> {
    pub net: &'a Network,
    pub prices: &'a PriceSeries,
    pub cfg: &'a GaConfig,
    sim: Simulator,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a Network, prices: &'a PriceSeries, cfg: &'a GaConfig) -> Result<Self, GaError> {
        // Reject bad tariffs before any simulation.
        fitness::electricity_cost(&[0.0; crate::network::HORIZON_HOURS], prices, 0)?;
        Ok(Self {
            net,
            prices,
            cfg,
            sim: Simulator::new(net, SimOptions::default())?,
        })
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn simulate(&self, schedule: &PumpSchedule) -> SimulationResult {
        self.sim.simulate(schedule)
    }

    /// Fitness of a schedule, or the reason it is infeasible.
    pub fn evaluate(&self, schedule: &PumpSchedule) -> Result<FitnessBreakdown, String> {
        let sim = self.sim.simulate(schedule);
        if !sim.feasible {
            return Err(sim.infeasibility_reason.unwrap_or_else(|| "infeasible".into()));
        }
        fitness(&sim, self.prices, self.net, self.cfg).map_err(|e| e.to_string())
    }
}

/// Strips hour/tank specifics so failure reasons can be tallied.
fn reason_kind(reason: &str) -> String {
    let s = reason.split(" in hour ").next().unwrap_or(reason);
    match s.strip_prefix("hour ") {
        Some(rest) => rest.split_once(": ").map(|(_, r)| r.to_string()).unwrap_or_else(|| s.to_string()),
        None => s.to_string(),
    }
}

/// Draws random schedules until `cfg.population` feasible ones are found.
/// Candidates are drawn and accepted in index order.
pub fn init_population(eval: &Evaluator, seed: u64) -> Result<Vec<Individual>, GaError> {
    let cfg = eval.cfg;
    let n_pumps = eval.net.pumps.len();
    let budget = cfg.init_budget_factor.max(1) * cfg.population;
    let mut pop = Vec::with_capacity(cfg.population);
    let mut failures: HashMap<String, usize> = HashMap::new();
    let mut next = 0;
    while pop.len() < cfg.population && next < budget {
        let want = cfg.population - pop.len();
        let end = (next + want.max(rayon::current_num_threads())).min(budget);
        let batch: Vec<(PumpSchedule, Result<FitnessBreakdown, String>)> = (next..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = keyed_rng(seed, purpose::INIT, i as u64, 0);
                let s = random_schedule(n_pumps, &mut rng);
                let f = eval.evaluate(&s);
                (s, f)
            })
            .collect();
        for (schedule, result) in batch {
            match result {
                Ok(fitness) if pop.len() < cfg.population => pop.push(Individual { schedule, fitness }),
                Ok(_) => {}
                Err(reason) => *failures.entry(reason_kind(&reason)).or_default() += 1,
            }
        }
        next = end;
    }
    if pop.len() < cfg.population {
        let reason = failures
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
            .map(|(r, n)| format!("{r} ({n} times)"))
            .unwrap_or_else(|| "none".into());
        return Err(GaError::InitBudget {
            needed: cfg.population,
            found: pop.len(),
            draws: next,
            reason,
        });
    }
    Ok(pop)
}

fn rank(pop: &mut [Individual]) {
    // stable: ties keep insertion order
    pop.sort_by(|a, b| a.fitness.total.total_cmp(&b.fitness.total));
}

fn stats(generation: usize, ranked: &[Individual]) -> GenerationStats {
    GenerationStats {
        generation,
        best: ranked[0].fitness,
        mean_total: ranked.iter().map(|i| i.fitness.total).sum::<f64>() / ranked.len() as f64,
    }
}

/// Produces the offspring for slot `slot` of generation `generation`.
fn offspring(eval: &Evaluator, ranked: &[Individual], seed: u64, generation: usize, slot: usize) -> (Individual, bool) {
    let cfg = eval.cfg;
    let mut rng = keyed_rng(seed, purpose::OFFSPRING, generation as u64, slot as u64);
    let mut first_parent = None;
    for _ in 0..cfg.max_offspring_attempts.max(1) {
        let a = select_parent(cfg.population, cfg.parent_pool, &mut rng);
        let b = select_parent(cfg.population, cfg.parent_pool, &mut rng);
        first_parent.get_or_insert(a);
        let mut child = crossover_two_point(&ranked[a].schedule, &ranked[b].schedule, &mut rng);
        mutate(&mut child, cfg, &mut rng);
        if let Ok(fitness) = eval.evaluate(&child) {
            return (
                Individual {
                    schedule: child,
                    fitness,
                },
                false,
            );
        }
    }
    (ranked[first_parent.unwrap_or(0)].clone(), true)
}

/// Runs the genetic algorithm. `on_generation` is called after each
/// generation with its statistics.
pub fn evolve_with<F: FnMut(&GenerationStats)>(
    net: &Network,
    prices: &PriceSeries,
    cfg: &GaConfig,
    seed: u64,
    mut on_generation: F,
) -> Result<GaOutcome, GaError> {
    cfg.check().map_err(GaError::Config)?;
    let eval = Evaluator::new(net, prices, cfg)?;
    let mut pop = init_population(&eval, seed)?;
    rank(&mut pop);
    let mut history = vec![stats(0, &pop)];
    on_generation(&history[0]);
    let mut fallback_copies = 0;
    for generation in 1..cfg.generations {
        let children: Vec<(Individual, bool)> = (cfg.elites..cfg.population)
            .into_par_iter()
            .map(|slot| offspring(&eval, &pop, seed, generation, slot))
            .collect();
        let mut next: Vec<Individual> = pop[..cfg.elites].to_vec();
        for (child, fallback) in children {
            fallback_copies += fallback as usize;
            next.push(child);
        }
        rank(&mut next);
        pop = next;
        let s = stats(generation, &pop);
        on_generation(&s);
        history.push(s);
    }
    Ok(GaOutcome {
        best: pop[0].clone(),
        history,
        population: pop,
        fallback_copies,
    })
}

pub fn evolve(net: &Network, prices: &PriceSeries, cfg: &GaConfig, seed: u64) -> Result<GaOutcome, GaError> {
    evolve_with(net, prices, cfg, seed, |s| {
        log::debug!("generation {}: best {:.4} mean {:.4}", s.generation, s.best.total, s.mean_total)
    })
}

/// Writes the fitness history as CSV.
pub fn write_history<W: Write>(history: &[GenerationStats], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "generation",
        "best_F",
        "mean_F",
        "best_c_elec",
        "best_p_tank",
        "best_p_pressure",
        "best_p_fraction",
    ])?;
    for s in history {
        w.write_record([
            s.generation.to_string(),
            s.best.total.to_string(),
            s.mean_total.to_string(),
            s.best.c_elec.to_string(),
            s.best.p_tank.to_string(),
            s.best.p_pressure.to_string(),
            s.best.p_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
