//! Run artifacts on disk.
//!
//! ```text
//! <out>/<scenario>/schedule.txt
//!                  fitness_history.csv
//!                  hydraulics.csv
//!                  mei_hourly.csv
//!                  mei_daily.csv
//!                  cdf.csv
//!                  summary.json
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::{RunArtifacts, RunError};
use crate::backtrack::{mei_cdf, MeiReport};
use crate::ga::write_history;
use crate::hydraulics::SimulationResult;
use crate::network::NodeKind;

/// Marker written where a value is undefined.
pub const UNDEFINED: &str = "undefined";

fn write_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(|e| write_err(path, e))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.to_string(), |v| v.to_string())
}

pub fn write_hydraulics<W: std::io::Write>(sim: &SimulationResult, out: W) -> csv::Result<()> {
    let layout = &sim.layout;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "element_id", "kind", "flow_m3h", "head_m", "level_m", "eff", "power_kW"])?;
    let empty = String::new;
    for st in &sim.states {
        let time = st.start.to_string();
        for j in 0..layout.n_nodes() {
            let (kind, flow, level) = match layout.node_kinds[j] {
                NodeKind::Junction => ("junction", st.node_demands[j].to_string(), empty()),
                NodeKind::Reservoir => (
                    "reservoir",
                    st.reservoir_outflow[j - layout.n_junctions].to_string(),
                    empty(),
                ),
                NodeKind::Tank => {
                    let n = j - layout.n_junctions - layout.n_reservoirs;
                    ("tank", st.tank_net_inflow[n].to_string(), st.tank_levels[n].to_string())
                }
            };
            w.write_record([
                time.clone(),
                layout.node_ids[j].clone(),
                kind.to_string(),
                flow,
                st.node_heads[j].to_string(),
                level,
                empty(),
                empty(),
            ])?;
        }
        for l in 0..layout.n_links() {
            let (kind, eff, power) = if l >= layout.n_pipes && l < layout.n_pipes + layout.n_pumps {
                let p = &st.pumps[l - layout.n_pipes];
                ("pump", p.efficiency.to_string(), p.power.to_string())
            } else if l < layout.n_pipes {
                ("pipe", empty(), empty())
            } else {
                ("valve", empty(), empty())
            };
            w.write_record([
                time.clone(),
                layout.link_ids[l].clone(),
                kind.to_string(),
                st.link_flows[l].to_string(),
                empty(),
                empty(),
                eff,
                power,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_mei_hourly<W: std::io::Write>(report: &MeiReport, out: W) -> csv::Result<()> {
    let layout = &report.layout;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "node_id", "mei_kwh_m3", "mei_dist", "mei_preinj", "sources"])?;
    for step in &report.steps {
        for (j, node) in step.nodes.iter().enumerate() {
            let time = step.start.to_string();
            let id = layout.node_ids[j].clone();
            match node {
                Some(m) => {
                    let sources: Vec<String> = m
                        .shares
                        .iter()
                        .map(|s| format!("{}:{}", report.source_ids[s.source], s.fraction))
                        .collect();
                    w.write_record([
                        time,
                        id,
                        m.total.to_string(),
                        m.distribution.to_string(),
                        m.pre_injection.to_string(),
                        sources.join(";"),
                    ])?;
                }
                None => w.write_record([time, id, UNDEFINED.into(), UNDEFINED.into(), UNDEFINED.into(), String::new()])?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes every artifact of a run into `<out>/<name>/` and returns that
/// directory.
pub fn write_run(out: &Path, run: &RunArtifacts) -> Result<PathBuf, RunError> {
    let dir = out.join(&run.name);
    std::fs::create_dir_all(&dir).map_err(|e| write_err(&dir, e))?;

    let path = dir.join("schedule.txt");
    std::fs::write(&path, run.schedule.to_string()).map_err(|e| write_err(&path, e))?;

    let path = dir.join("fitness_history.csv");
    write_history(&run.history, create(&path)?).map_err(|e| write_err(&path, e))?;

    let path = dir.join("hydraulics.csv");
    write_hydraulics(&run.sim, create(&path)?).map_err(|e| write_err(&path, e))?;

    let path = dir.join("mei_hourly.csv");
    write_mei_hourly(&run.report, create(&path)?).map_err(|e| write_err(&path, e))?;

    let path = dir.join("mei_daily.csv");
    let layout = &run.report.layout;
    let write_daily = || -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(create(&path).map_err(|e| std::io::Error::other(e.to_string()))?);
        w.write_record(["node_id", "elevation_m", "daily_demand_m3", "daily_mei_kwh_m3"])?;
        for j in 0..layout.n_junctions {
            w.write_record([
                layout.node_ids[j].clone(),
                layout.elevations[j].to_string(),
                run.daily.demand_volume[j].to_string(),
                opt(run.daily.nodes[j]),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write_daily().map_err(|e| write_err(&path, e))?;

    let path = dir.join("cdf.csv");
    let write_cdf = || -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(create(&path).map_err(|e| std::io::Error::other(e.to_string()))?);
        w.write_record(["daily_mei_kwh_m3", "cumulative_fraction"])?;
        for (v, f) in mei_cdf(&run.daily) {
            w.write_record([v.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    };
    write_cdf().map_err(|e| write_err(&path, e))?;

    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&run.summary).map_err(|e| write_err(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| write_err(&path, e))?;
    Ok(dir)
}
