//! Sensitivity sweep: the base scenario plus variants that each re-optimize
//! their own schedule.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{distribution_stats, run_scenario, RunArtifacts, RunError, RunOptions};
use crate::network::Network;
use crate::rng::{keyed_rng, purpose};
use crate::scenario::{apply_scenario, ScenarioSpec, SourceSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum VariantChange {
    /// Multiplies the scenario demand multiplier.
    Demand(f64),
    /// Multiplies the scenario roughness multiplier.
    Roughness(f64),
    /// Shifts one source's target share; the others are rescaled to keep
    /// the total at one.
    SourceShare { source: String, delta: f64 },
    /// Switches the active price series.
    Prices(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variant {
    pub name: String,
    pub change: VariantChange,
}

impl Variant {
    pub fn new(name: &str, change: VariantChange) -> Self {
        Self {
            name: name.to_string(),
            change,
        }
    }

    /// Seed of the variant's run, derived from the base seed and the
    /// variant name only.
    pub fn seed(&self, base_seed: u64) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.name.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        keyed_rng(base_seed, purpose::SWEEP, h, 0).gen()
    }

    /// The scenario this variant runs.
    pub fn apply(&self, base: &Network, spec: &ScenarioSpec) -> Result<ScenarioSpec, RunError> {
        let mut out = spec.clone();
        out.name = self.name.clone();
        out.seed = self.seed(spec.seed);
        match &self.change {
            VariantChange::Demand(m) => out.demand_multiplier *= m,
            VariantChange::Roughness(m) => out.roughness_multiplier *= m,
            VariantChange::Prices(id) => {
                if !out.prices.contains_key(id) {
                    return Err(crate::scenario::ScenarioError::UnknownSeries(id.clone()).into());
                }
                out.price_series = Some(id.clone());
            }
            VariantChange::SourceShare { source, delta } => {
                let net = apply_scenario(base, spec)?;
                if !net.reservoirs.contains_key(source) {
                    return Err(crate::scenario::ScenarioError::UnknownSource(source.clone()).into());
                }
                let old = net.reservoirs[source].target_fraction;
                let new = (old + delta).clamp(0.0, 1.0);
                let others = net.reservoirs.len() - 1;
                out.sources = net
                    .reservoirs
                    .iter()
                    .map(|(id, r)| {
                        let target_fraction = if id == source {
                            new
                        } else if old < 1.0 {
                            r.target_fraction * (1.0 - new) / (1.0 - old)
                        } else {
                            (1.0 - new) / others as f64
                        };
                        let s = SourceSpec {
                            transmission_ei: r.transmission_ei,
                            treatment_ei: r.treatment_ei,
                            target_fraction,
                        };
                        (id.clone(), s)
                    })
                    .collect();
            }
        }
        Ok(out)
    }
}

/// Demand ±25 %, roughness ±50 %, the highest-intensity source's share
/// ±0.2 and every price series other than the active one.
pub fn standard_variants(base: &Network, spec: &ScenarioSpec) -> Result<Vec<Variant>, RunError> {
    let mut v = vec![
        Variant::new("D-", VariantChange::Demand(0.75)),
        Variant::new("D+", VariantChange::Demand(1.25)),
        Variant::new("R-", VariantChange::Roughness(0.5)),
        Variant::new("R+", VariantChange::Roughness(1.5)),
    ];
    let net = apply_scenario(base, spec)?;
    if net.reservoirs.len() > 1 {
        let mut best: Option<(&String, f64)> = None;
        for (id, r) in &net.reservoirs {
            if best.is_none_or(|(_, ei)| r.pre_injection_ei() > ei) {
                best = Some((id, r.pre_injection_ei()));
            }
        }
        let source = best.expect("at least two reservoirs").0.clone();
        v.push(Variant::new(
            "I-",
            VariantChange::SourceShare {
                source: source.clone(),
                delta: -0.2,
            },
        ));
        v.push(Variant::new("I+", VariantChange::SourceShare { source, delta: 0.2 }));
    }
    for id in spec.prices.keys() {
        if Some(id) != spec.price_series.as_ref() {
            v.push(Variant::new(id, VariantChange::Prices(id.clone())));
        }
    }
    Ok(v)
}

#[derive(Debug)]
pub struct SweepEntry {
    pub variant: Variant,
    pub seed: u64,
    pub outcome: Result<RunArtifacts, String>,
}

#[derive(Debug)]
pub struct SweepResult {
    pub base: RunArtifacts,
    pub variants: Vec<SweepEntry>,
}

/// Runs every variant of `spec`. A failing variant is recorded and does not
/// stop the others.
pub fn run_variants(base_net: &Network, spec: &ScenarioSpec, variants: &[Variant], opts: &RunOptions) -> Vec<SweepEntry> {
    variants
        .par_iter()
        .map(|v| {
            let seed = v.seed(spec.seed);
            let outcome = v
                .apply(base_net, spec)
                .and_then(|s| run_scenario(base_net, &s, opts))
                .map_err(|e| e.to_string());
            if let Err(e) = &outcome {
                log::warn!("variant {} failed: {e}", v.name);
            }
            SweepEntry {
                variant: v.clone(),
                seed,
                outcome,
            }
        })
        .collect()
}

/// Runs the base scenario, then every variant.
pub fn run_sweep(
    base_net: &Network,
    spec: &ScenarioSpec,
    variants: &[Variant],
    opts: &RunOptions,
) -> Result<SweepResult, RunError> {
    let base = run_scenario(base_net, spec, opts)?;
    let variants = run_variants(base_net, spec, variants, opts);
    Ok(SweepResult { base, variants })
}

fn median(values: &[Option<f64>]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().flatten().copied().collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Writes the comparison of daily-MEI distributions, base first.
pub fn write_comparison<W: Write>(sweep: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "variant",
        "seed",
        "feasible",
        "n_consumers",
        "mean_daily_mei",
        "min_daily_mei",
        "median_daily_mei",
        "max_daily_mei",
        "system_mei",
        "mean_shift",
        "pct_shift",
        "total_energy_kwh",
        "c_elec",
        "error",
    ])?;
    let base_mean = sweep.base.summary.mean_daily_mei;
    let mut row = |name: &str, seed: u64, run: Result<&RunArtifacts, &String>| -> csv::Result<()> {
        match run {
            Ok(a) => {
                let (mean, min, max) = distribution_stats(&a.daily.nodes);
                let shift = mean.zip(base_mean).map(|(m, b)| m - b);
                let pct = shift.zip(base_mean).map(|(s, b)| 100.0 * s / b);
                w.write_record([
                    name.to_string(),
                    seed.to_string(),
                    a.sim.feasible.to_string(),
                    a.daily.nodes.iter().flatten().count().to_string(),
                    opt(mean),
                    opt(min),
                    opt(median(&a.daily.nodes)),
                    opt(max),
                    opt(a.daily.system),
                    opt(shift),
                    opt(pct),
                    a.sim.total_energy().to_string(),
                    a.summary.fitness.c_elec.to_string(),
                    String::new(),
                ])
            }
            Err(e) => {
                let mut rec = vec![name.to_string(), seed.to_string()];
                rec.extend(std::iter::repeat_n(String::new(), 11));
                rec.push(e.clone());
                w.write_record(rec)
            }
        }
    };
    row(&sweep.base.name, sweep.base.spec.seed, Ok(&sweep.base))?;
    for e in &sweep.variants {
        row(&e.variant.name, e.seed, e.outcome.as_ref())?;
    }
    w.flush()?;
    Ok(())
}
