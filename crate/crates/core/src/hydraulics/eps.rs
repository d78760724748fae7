//! Extended-period simulation: hourly network solves coupled through
//! backward-Euler tank level integration.

use std::sync::Arc;

use super::model::{Allowed, HydraulicModel, Layout, StepInput, StepSolution};
use super::{pump_power, HydraulicState, PumpOperation, SimulationResult, StepFailure};
use crate::network::{Network, PumpModel, HORIZON_HOURS};
use crate::schedule::PumpSchedule;

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Integration step, hours. Must divide one hour evenly.
    pub dt_hours: f64,
    /// Tank level tolerance of the implicit step, m.
    pub tank_tolerance: f64,
    pub max_tank_iterations: usize,
    pub max_newton_iterations: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt_hours: 1.0,
            tank_tolerance: 1e-6,
            max_tank_iterations: 20,
            max_newton_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct TankInfo {
    elevation: f64,
    area: f64,
    min: f64,
    max: f64,
    init: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Upper,
    Lower,
}

/// Outcome of advancing tank levels over (part of) one step.
#[derive(Debug, Clone)]
pub struct TankStep {
    pub solution: Option<StepSolution>,
    /// New tank levels, m.
    pub levels: Vec<f64>,
    /// Hours actually advanced (shorter than requested when a tank hit a bound).
    pub duration: f64,
    /// Tank index and whether it hit its upper bound.
    pub clamped: Option<(usize, bool)>,
}

/// Simulation context shared by many runs of one network.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub model: HydraulicModel,
    tanks: Vec<TankInfo>,
    pumps: Vec<PumpModel>,
    reservoir_heads: Vec<f64>,
    /// [hour][junction] demand, m³/h.
    demands: Vec<Vec<f64>>,
    pub options: SimOptions,
}

impl Simulator {
    pub fn new(net: &Network, options: SimOptions) -> Result<Self, StepFailure> {
        let mut model = HydraulicModel::new(net)?;
        model.max_iterations = options.max_newton_iterations;
        let tanks = net
            .tanks
            .values()
            .map(|t| TankInfo {
                elevation: t.elevation,
                area: t.area(),
                min: t.min_level,
                max: t.max_level,
                init: t.init_level,
            })
            .collect();
        let demands = (0..HORIZON_HOURS)
            .map(|h| net.junctions.values().map(|j| net.demand_at(j, h)).collect())
            .collect();
        Ok(Self {
            model,
            tanks,
            pumps: net.pumps.values().map(|p| p.model).collect(),
            reservoir_heads: net.reservoirs.values().map(|r| r.head).collect(),
            demands,
            options,
        })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.model.layout
    }

    pub fn tank_areas(&self) -> Vec<f64> {
        self.tanks.iter().map(|t| t.area).collect()
    }

    pub fn initial_levels(&self) -> Vec<f64> {
        self.tanks.iter().map(|t| t.init).collect()
    }

    /// Junction demands (m³/h) during horizon hour `hour`.
    pub fn demands_at(&self, hour: usize) -> &[f64] {
        &self.demands[hour]
    }

    /// Replaces the demand table, e.g. for perturbation runs.
    pub fn set_demands(&mut self, demands: Vec<Vec<f64>>) {
        self.demands = demands;
    }

    fn fixed_heads(&self, levels: &[f64]) -> Vec<f64> {
        self.reservoir_heads
            .iter()
            .copied()
            .chain(self.tanks.iter().zip(levels).map(|(t, l)| t.elevation + l))
            .collect()
    }

    fn tank_net_inflow(&self, sol: &StepSolution) -> Vec<f64> {
        let lay = &self.model.layout;
        let mut net = vec![0.0; lay.n_tanks];
        for k in 0..lay.n_links() {
            let q = sol.flows[k];
            if let Some(t) = tank_of(lay, lay.link_to[k]) {
                net[t] += q;
            }
            if let Some(t) = tank_of(lay, lay.link_from[k]) {
                net[t] -= q;
            }
        }
        net
    }

    /// Solves one period with tanks held at `levels`.
    pub fn solve_period(
        &self,
        demands: &[f64],
        pump_on: &[bool],
        levels: &[f64],
        allowed: &[Allowed],
        warm: Option<&StepSolution>,
    ) -> Result<StepSolution, StepFailure> {
        let heads = self.fixed_heads(levels);
        let input = StepInput {
            demands,
            pump_on,
            fixed_heads: &heads,
            allowed,
        };
        self.model.solve(&input, warm)
    }

    /// Advances tank levels implicitly over at most `dt` hours:
    /// `level' = level + dt * Q_net(level') / area`, iterated on the coupled
    /// network solve. When a tank would cross a bound the step is cut at the
    /// crossing time and the tank is reported as clamped.
    pub fn step_tanks(
        &self,
        levels: &[f64],
        dt: f64,
        demands: &[f64],
        pump_on: &[bool],
        allowed: &[Allowed],
        warm: Option<&StepSolution>,
    ) -> Result<TankStep, StepFailure> {
        let nt = self.tanks.len();
        let tol = self.options.tank_tolerance;
        if nt == 0 {
            let sol = self.solve_period(demands, pump_on, levels, allowed, warm)?;
            return Ok(TankStep {
                solution: Some(sol),
                levels: vec![],
                duration: dt,
                clamped: None,
            });
        }

        let mut guess = levels.to_vec();
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut warm_sol = warm.cloned();
        let mut converged = None;
        for _ in 0..self.options.max_tank_iterations {
            let sol = self.solve_period(demands, pump_on, &guess, allowed, warm_sol.as_ref())?;
            let qnet = self.tank_net_inflow(&sol);
            let target: Vec<f64> = (0..nt)
                .map(|n| levels[n] + dt * qnet[n] / self.tanks[n].area)
                .collect();
            let g: Vec<f64> = (0..nt).map(|n| guess[n] - target[n]).collect();
            if g.iter().all(|v| v.abs() < tol) {
                converged = Some((sol, target));
                break;
            }
            let next: Vec<f64> = match &prev {
                None => target.clone(),
                Some((pg, pgv)) => (0..nt)
                    .map(|n| {
                        let dl = guess[n] - pg[n];
                        let mut slope = if dl.abs() > 1e-14 { (g[n] - pgv[n]) / dl } else { 1.0 };
                        if !slope.is_finite() {
                            slope = 1.0;
                        }
                        guess[n] - g[n] / slope.clamp(0.1, 1e3)
                    })
                    .collect(),
            };
            prev = Some((guess.clone(), g));
            guess = next;
            warm_sol = Some(sol);
        }
        let (sol, new_levels) = converged.ok_or(StepFailure::TankNonConvergence {
            iterations: self.options.max_tank_iterations,
        })?;

        // earliest bound crossing, if any
        let mut first: Option<(f64, usize, Bound)> = None;
        for (n, t) in self.tanks.iter().enumerate() {
            let crossing = if new_levels[n] > t.max + 1e-12 {
                Some((t.max, Bound::Upper))
            } else if new_levels[n] < t.min - 1e-12 {
                Some((t.min, Bound::Lower))
            } else {
                None
            };
            if let Some((b, kind)) = crossing {
                let frac = (b - levels[n]) / (new_levels[n] - levels[n]);
                if first.is_none_or(|(f, _, _)| frac < f) {
                    first = Some((frac.clamp(0.0, 1.0), n, kind));
                }
            }
        }
        let Some((frac, v, bound)) = first else {
            return Ok(TankStep {
                solution: Some(sol),
                levels: new_levels,
                duration: dt,
                clamped: None,
            });
        };
        let bound_level = match bound {
            Bound::Upper => self.tanks[v].max,
            Bound::Lower => self.tanks[v].min,
        };
        let clamped = Some((v, bound == Bound::Upper));
        if (bound_level - levels[v]).abs() < 1e-12 {
            return Ok(TankStep {
                solution: None,
                levels: levels.to_vec(),
                duration: 0.0,
                clamped,
            });
        }

        // Sub-period ending exactly when tank v reaches its bound.
        let mut tau = frac * dt;
        let mut guess: Vec<f64> = (0..nt)
            .map(|n| levels[n] + frac * (new_levels[n] - levels[n]))
            .collect();
        guess[v] = bound_level;
        let mut warm_sol = Some(sol);
        for _ in 0..self.options.max_tank_iterations {
            let sol = self.solve_period(demands, pump_on, &guess, allowed, warm_sol.as_ref())?;
            let qnet = self.tank_net_inflow(&sol);
            let rate = qnet[v] / self.tanks[v].area;
            let new_tau = if rate != 0.0 && ((bound_level - levels[v]) / rate) > 0.0 {
                ((bound_level - levels[v]) / rate).min(dt)
            } else {
                tau
            };
            let target: Vec<f64> = (0..nt)
                .map(|n| levels[n] + new_tau * qnet[n] / self.tanks[n].area)
                .collect();
            let done = (new_tau - tau).abs() * rate.abs() < tol
                && (0..nt).filter(|&n| n != v).all(|n| (target[n] - guess[n]).abs() < tol);
            tau = new_tau;
            for n in 0..nt {
                if n != v {
                    guess[n] = target[n];
                }
            }
            if done {
                let mut levels_out = target;
                levels_out[v] = bound_level;
                return Ok(TankStep {
                    solution: Some(sol),
                    levels: levels_out,
                    duration: tau,
                    clamped,
                });
            }
            warm_sol = Some(sol);
        }
        Err(StepFailure::TankNonConvergence {
            iterations: self.options.max_tank_iterations,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &self,
        sol: &StepSolution,
        time_index: usize,
        hour: usize,
        start: f64,
        duration: f64,
        demands: &[f64],
        pump_on: &[bool],
        levels: Vec<f64>,
    ) -> HydraulicState {
        let lay = &self.model.layout;
        let pumps = (0..lay.n_pumps)
            .map(|i| {
                let k = lay.pump_link(i);
                let q = sol.flows[k];
                let gain = sol.heads[lay.link_to[k]] - sol.heads[lay.link_from[k]];
                let running = pump_on[i] && q > 0.0;
                let efficiency = if running { self.pumps[i].efficiency_at(q) } else { 0.0 };
                let head_gain = if running { gain.max(0.0) } else { 0.0 };
                let power = if running {
                    pump_power(q, head_gain, efficiency).unwrap_or(0.0)
                } else {
                    0.0
                };
                PumpOperation {
                    on: running,
                    flow: q,
                    head_gain,
                    efficiency,
                    power,
                }
            })
            .collect();
        let mut node_demands = vec![0.0; lay.n_nodes()];
        node_demands[..lay.n_junctions].copy_from_slice(demands);
        let mut reservoir_outflow = vec![0.0; lay.n_reservoirs];
        for k in 0..lay.n_links() {
            let q = sol.flows[k];
            let (a, b) = (lay.link_from[k], lay.link_to[k]);
            if let Some(r) = reservoir_of(lay, a) {
                reservoir_outflow[r] += q;
            }
            if let Some(r) = reservoir_of(lay, b) {
                reservoir_outflow[r] -= q;
            }
        }
        let min_consumer_pressure = (0..lay.n_junctions)
            .filter(|&j| demands[j] > 0.0)
            .map(|j| sol.heads[j] - lay.elevations[j])
            .fold(f64::INFINITY, f64::min);
        HydraulicState {
            time_index,
            hour,
            start,
            duration,
            link_flows: sol.flows.clone(),
            link_states: sol.states.clone(),
            node_heads: sol.heads.clone(),
            node_demands,
            pumps,
            tank_levels: levels,
            tank_net_inflow: self.tank_net_inflow(sol),
            reservoir_outflow,
            min_consumer_pressure,
        }
    }

    /// Single-period state with tanks held at `levels`.
    pub fn snapshot_state(
        &self,
        demands: &[f64],
        pump_on: &[bool],
        levels: &[f64],
    ) -> Result<HydraulicState, StepFailure> {
        let allowed = vec![Allowed::Any; self.model.layout.n_links()];
        let sol = self.solve_period(demands, pump_on, levels, &allowed, None)?;
        Ok(self.assemble(&sol, 0, 0, 0.0, 0.0, demands, pump_on, levels.to_vec()))
    }

    /// Runs the full horizon under `schedule`.
    pub fn simulate(&self, schedule: &PumpSchedule) -> SimulationResult {
        let lay = self.model.layout.clone();
        assert_eq!(schedule.n_pumps(), lay.n_pumps, "schedule rows must match pump count");
        let per_hour = (1.0 / self.options.dt_hours).round() as usize;
        assert!(
            per_hour >= 1 && (per_hour as f64 * self.options.dt_hours - 1.0).abs() < 1e-9,
            "dt must divide one hour"
        );
        let dt = 1.0 / per_hour as f64;
        let mut levels = self.initial_levels();
        let mut states: Vec<HydraulicState> = Vec::with_capacity(HORIZON_HOURS * per_hour);
        let mut reason: Option<String> = None;
        let mut warnings = Vec::new();
        let mut warm: Option<StepSolution> = None;
        let mut elapsed = 0.0;

        'steps: for s in 0..HORIZON_HOURS * per_hour {
            let hour = s / per_hour;
            let demands = self.demands[hour].clone();
            let pump_on = schedule.column(hour);
            let mut allowed = vec![Allowed::Any; lay.n_links()];
            let mut remaining = dt;
            let step_start = s as f64 * dt;
            let mut guard = 0;
            while remaining > 1e-12 {
                guard += 1;
                if guard > 4 * lay.n_tanks + 4 {
                    reason.get_or_insert_with(|| format!("tank clamping did not settle in hour {hour}"));
                    break 'steps;
                }
                let step = match self.step_tanks(&levels, remaining, &demands, &pump_on, &allowed, warm.as_ref()) {
                    Ok(step) => step,
                    Err(e) => {
                        reason = Some(format!("hour {hour}: {e}"));
                        break 'steps;
                    }
                };
                if let Some(sol) = &step.solution {
                    if step.duration > 0.0 {
                        let start = step_start + (dt - remaining);
                        states.push(self.assemble(
                            sol,
                            states.len(),
                            hour,
                            start,
                            step.duration,
                            &demands,
                            &pump_on,
                            step.levels.clone(),
                        ));
                    }
                    warm = Some(sol.clone());
                }
                levels = step.levels;
                remaining -= step.duration;
                elapsed += step.duration;
                if let Some((t, upper)) = step.clamped {
                    let node = lay.tank_node(t);
                    // full tanks may only drain, empty tanks may only fill
                    for k in 0..lay.n_links() {
                        let into_tank = if upper { Allowed::Backward } else { Allowed::Forward };
                        let out_of_tank = if upper { Allowed::Forward } else { Allowed::Backward };
                        if lay.link_to[k] == node {
                            allowed[k] = allowed[k].and(into_tank);
                        } else if lay.link_from[k] == node {
                            allowed[k] = allowed[k].and(out_of_tank);
                        }
                    }
                    if !upper {
                        reason = Some(format!(
                            "tank {} drained to its minimum level in hour {hour}",
                            lay.node_ids[node]
                        ));
                        break 'steps;
                    }
                }
            }
        }

        let mut energy_per_step = vec![0.0; HORIZON_HOURS];
        let mut injected_volume = vec![0.0; lay.n_reservoirs];
        let mut p_low = f64::INFINITY;
        for st in &states {
            energy_per_step[st.hour] += st.pump_energy();
            for (v, q) in injected_volume.iter_mut().zip(&st.reservoir_outflow) {
                *v += q.max(0.0) * st.duration;
            }
            p_low = p_low.min(st.min_consumer_pressure);
            if st.min_consumer_pressure < 0.0 {
                warnings.push(format!(
                    "negative pressure {:.3} m in hour {}",
                    st.min_consumer_pressure, st.hour
                ));
            }
        }
        SimulationResult {
            layout: lay,
            states,
            feasible: reason.is_none(),
            infeasibility_reason: reason,
            warnings,
            p_low,
            energy_per_step,
            injected_volume,
            initial_levels: self.initial_levels(),
            final_levels: levels,
            simulated_hours: elapsed,
        }
    }
}

fn tank_of(lay: &Layout, node: usize) -> Option<usize> {
    (node >= lay.n_junctions + lay.n_reservoirs).then(|| node - lay.n_junctions - lay.n_reservoirs)
}

fn reservoir_of(lay: &Layout, node: usize) -> Option<usize> {
    (node >= lay.n_junctions && node < lay.n_junctions + lay.n_reservoirs).then(|| node - lay.n_junctions)
}

/// Simulates `net` for one horizon under `schedule`.
pub fn simulate_eps(net: &Network, schedule: &PumpSchedule, options: &SimOptions) -> Result<SimulationResult, StepFailure> {
    schedule
        .check_pumps(net.pumps.len())
        .map_err(|e| StepFailure::InvalidNetwork { detail: e.to_string() })?;
    Ok(Simulator::new(net, options.clone())?.simulate(schedule))
}
