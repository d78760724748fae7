//! `mei`: command-line access to the simulation, optimization and
//! backtracking pipeline.
//!
//! Exit codes: 0 success, 1 invalid input (network, scenario or schedule),
//! 2 runtime failure or bad usage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use mei::ga::{evolve, write_history};
use mei::hydraulics::{estimate_bep, simulate_eps, SimOptions};
use mei::inp::{parse_inp_unvalidated, InpError};
use mei::network::reconstruct_pump_curves;
use mei::runner::{
    load_network, load_scenario, output::write_hydraulics, prepare_network, run_perturbation, run_scenario,
    run_sweep, standard_variants, write_comparison, write_perturbation, write_run, RunError, RunOptions,
};
use mei::scenario::{PerturbationSpec, ScenarioSpec};
use mei::{validate_network, PumpSchedule};

#[derive(Parser)]
#[command(name = "mei", version, about = "Marginal energy intensity of water distribution networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Output directory.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the number of GA generations.
    #[arg(long, global = true)]
    generations: Option<usize>,
    /// Override the GA population size.
    #[arg(long, global = true)]
    population: Option<usize>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args)]
struct Inputs {
    /// Network file in INP format.
    #[arg(value_name = "NETWORK")]
    network_arg: Option<PathBuf>,
    /// Scenario file.
    #[arg(value_name = "SCENARIO")]
    scenario_arg: Option<PathBuf>,
    #[arg(long, conflicts_with = "network_arg")]
    network: Option<PathBuf>,
    #[arg(long, conflicts_with = "scenario_arg")]
    scenario: Option<PathBuf>,
    /// Pump schedule file (one 24-character 0/1 line per pump).
    #[arg(long)]
    schedule: Option<PathBuf>,
}

impl Inputs {
    fn network(&self) -> Result<&Path, Failure> {
        self.network
            .as_deref()
            .or(self.network_arg.as_deref())
            .ok_or_else(|| Failure::Usage("a network file is required".into()))
    }

    fn scenario_path(&self) -> Option<&Path> {
        self.scenario.as_deref().or(self.scenario_arg.as_deref())
    }

    fn scenario(&self) -> Result<&Path, Failure> {
        self.scenario_path()
            .ok_or_else(|| Failure::Usage("a scenario file is required".into()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a network and list rule violations.
    Validate(Inputs),
    /// Simulate a schedule and dump the hydraulic states.
    Simulate(Inputs),
    /// Optimize the pump schedule.
    Optimize(Inputs),
    /// Optimize (or use --schedule), simulate and backtrack MEI.
    Mei(Inputs),
    /// Run the base scenario and its sensitivity variants.
    Sweep(Inputs),
    /// Perturb consumer demands under the base schedule.
    Perturb(Inputs),
    /// Estimate best-efficiency points and reconstruct pump curves.
    Curves {
        #[command(flatten)]
        inputs: Inputs,
        /// Feasible random draws to average.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Efficiency at the best-efficiency point.
        #[arg(long, default_value_t = 0.75)]
        efficiency: f64,
    },
}

enum Failure {
    Invalid(anyhow::Error),
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Network(_)
            | RunError::Scenario(_)
            | RunError::MissingPrices(_)
            | RunError::Schedule(_)
            | RunError::Read { .. } => Failure::Invalid(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn scenario_with_overrides(path: &Path, g: &Global) -> Result<ScenarioSpec, Failure> {
    let mut spec = load_scenario(path)?;
    if let Some(seed) = g.seed {
        spec.seed = seed;
    }
    if let Some(n) = g.generations {
        spec.ga.generations = n;
    }
    if let Some(n) = g.population {
        spec.ga.population = n;
        spec.ga.parent_pool = spec.ga.parent_pool.min(n);
    }
    Ok(spec)
}

fn read_schedule(path: &Path) -> Result<PumpSchedule, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
    text.parse::<PumpSchedule>()
        .map_err(|e| Failure::Invalid(anyhow::anyhow!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(Failure::Runtime)
}

fn validate(inputs: &Inputs) -> Result<(), Failure> {
    let path = inputs.network()?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
    let parsed = parse_inp_unvalidated(&text).map_err(|e: InpError| Failure::Invalid(e.into()))?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    let violations = validate_network(&parsed.network);
    for v in &violations {
        eprintln!("{v}");
    }
    if violations.is_empty() {
        eprintln!("{}: valid", path.display());
        Ok(())
    } else {
        Err(Failure::Invalid(anyhow::anyhow!("{} violation(s)", violations.len())))
    }
}

fn simulate(inputs: &Inputs, g: &Global) -> Result<(), Failure> {
    let base = load_network(inputs.network()?)?;
    let net = match inputs.scenario_path() {
        Some(p) => prepare_network(&base, &scenario_with_overrides(p, g)?)?,
        None => base,
    };
    let path = inputs
        .schedule
        .as_deref()
        .ok_or_else(|| Failure::Usage("simulate needs --schedule".into()))?;
    let schedule = read_schedule(path)?;
    schedule
        .check_pumps(net.pumps.len())
        .map_err(|e| Failure::Invalid(anyhow::anyhow!("{}: {e}", path.display())))?;
    let sim = simulate_eps(&net, &schedule, &SimOptions::default()).map_err(|e| Failure::Runtime(e.into()))?;
    for w in &sim.warnings {
        eprintln!("warning: {w}");
    }
    match &sim.infeasibility_reason {
        Some(r) => eprintln!("infeasible: {r}"),
        None => eprintln!("feasible; pump energy {:.3} kWh", sim.total_energy()),
    }
    create_dir(&g.out)?;
    let file = g.out.join("hydraulics.csv");
    let w = std::fs::File::create(&file).with_context(|| format!("cannot create {}", file.display()))?;
    write_hydraulics(&sim, w).context("writing hydraulics")?;
    eprintln!("wrote {}", file.display());
    Ok(())
}

fn optimize(inputs: &Inputs, g: &Global) -> Result<(), Failure> {
    let spec = scenario_with_overrides(inputs.scenario()?, g)?;
    let base = load_network(inputs.network()?)?;
    let net = prepare_network(&base, &spec)?;
    let prices = spec.active_prices().expect("checked when loading");
    let out = evolve(&net, prices, &spec.ga, spec.seed).map_err(|e| Failure::Runtime(e.into()))?;
    let dir = g.out.join(&spec.name);
    create_dir(&dir)?;
    std::fs::write(dir.join("schedule.txt"), out.best.schedule.to_string()).context("writing schedule")?;
    let file = std::fs::File::create(dir.join("fitness_history.csv")).context("creating fitness history")?;
    write_history(&out.history, file).context("writing fitness history")?;
    eprintln!(
        "best fitness {:.4} (electricity {:.4}); wrote {}",
        out.best.fitness.total,
        out.best.fitness.c_elec,
        dir.display()
    );
    Ok(())
}

fn run_options(inputs: &Inputs) -> Result<RunOptions, Failure> {
    Ok(RunOptions {
        schedule: inputs.schedule.as_deref().map(read_schedule).transpose()?,
        ..RunOptions::default()
    })
}

fn mei_cmd(inputs: &Inputs, g: &Global) -> Result<(), Failure> {
    let spec = scenario_with_overrides(inputs.scenario()?, g)?;
    let net = load_network(inputs.network()?)?;
    let run = run_scenario(&net, &spec, &run_options(inputs)?)?;
    for w in &run.summary.warnings {
        eprintln!("warning: {w}");
    }
    let dir = write_run(&g.out, &run)?;
    if let Some(s) = run.daily.system {
        eprintln!("system average MEI {s:.4} kWh/m3");
    }
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn sweep(inputs: &Inputs, g: &Global) -> Result<(), Failure> {
    let spec = scenario_with_overrides(inputs.scenario()?, g)?;
    let net = load_network(inputs.network()?)?;
    let variants = standard_variants(&net, &spec)?;
    let result = run_sweep(&net, &spec, &variants, &run_options(inputs)?)?;
    write_run(&g.out, &result.base)?;
    for e in &result.variants {
        match &e.outcome {
            Ok(run) => {
                write_run(&g.out, run)?;
            }
            Err(msg) => eprintln!("variant {} failed: {msg}", e.variant.name),
        }
    }
    let file = g.out.join("comparison.csv");
    let w = std::fs::File::create(&file).with_context(|| format!("cannot create {}", file.display()))?;
    write_comparison(&result, w).context("writing comparison")?;
    eprintln!("wrote {}", file.display());
    Ok(())
}

fn perturb(inputs: &Inputs, g: &Global) -> Result<(), Failure> {
    let spec = scenario_with_overrides(inputs.scenario()?, g)?;
    let net = load_network(inputs.network()?)?;
    let base = run_scenario(&net, &spec, &run_options(inputs)?)?;
    let dir = write_run(&g.out, &base)?;
    let pspec = spec.perturbation.clone().unwrap_or_else(PerturbationSpec::default);
    let table = run_perturbation(&base, &pspec, spec.seed, &RunOptions::default());
    let file = dir.join("perturbation.csv");
    let w = std::fs::File::create(&file).with_context(|| format!("cannot create {}", file.display()))?;
    write_perturbation(&table, w).context("writing perturbation table")?;
    for level in &pspec.levels {
        eprintln!(
            "level {level}: median max deviation {:?} kWh/m3, largest change {:.2}%",
            table.median_max_delta(*level),
            table.max_pct_any_node(*level)
        );
    }
    if table.failures() > 0 {
        eprintln!("{} perturbed run(s) infeasible and excluded", table.failures());
    }
    eprintln!("wrote {}", file.display());
    Ok(())
}

fn curves(inputs: &Inputs, g: &Global, samples: usize, efficiency: f64) -> Result<(), Failure> {
    let base = load_network(inputs.network()?)?;
    let (net, seed) = match inputs.scenario_path() {
        Some(p) => {
            let spec = scenario_with_overrides(p, g)?;
            (mei::scenario::apply_scenario(&base, &spec).map_err(RunError::from)?, spec.seed)
        }
        None => (base, g.seed.unwrap_or(0)),
    };
    let estimates =
        estimate_bep(&net, samples, seed, &Default::default()).map_err(|e| Failure::Runtime(e.into()))?;
    create_dir(&g.out)?;
    let file = g.out.join("curves.csv");
    let mut w = csv::Writer::from_path(&file).with_context(|| format!("cannot create {}", file.display()))?;
    w.write_record(["pump_id", "bep_flow_m3h", "bep_head_m", "shutoff_head_m", "runout_flow_m3h"])
        .context("writing curves")?;
    for e in &estimates {
        let c = reconstruct_pump_curves(e.flow, e.head, efficiency).map_err(|err| Failure::Runtime(err.into()))?;
        w.write_record([
            e.pump_id.clone(),
            e.flow.to_string(),
            e.head.to_string(),
            c.shutoff_head().to_string(),
            c.runout_flow().to_string(),
        ])
        .context("writing curves")?;
        eprintln!("{}: BEP {:.2} m3/h at {:.2} m", e.pump_id, e.flow, e.head);
    }
    w.flush().context("writing curves")?;
    eprintln!("wrote {}", file.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    let g = &cli.global;
    let result = match &cli.command {
        Command::Validate(i) => validate(i),
        Command::Simulate(i) => simulate(i, g),
        Command::Optimize(i) => optimize(i, g),
        Command::Mei(i) => mei_cmd(i, g),
        Command::Sweep(i) => sweep(i, g),
        Command::Perturb(i) => perturb(i, g),
        Command::Curves {
            inputs,
            samples,
            efficiency,
        } => curves(inputs, g, *samples, *efficiency),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
