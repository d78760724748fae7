//! Energy intensity of stored water.
//!
//! A tank's intensity is the inflow-volume-weighted average intensity of the
//! water it received over the horizon. Water a tank receives from another
//! tank carries that tank's (unknown) intensity, so the tank values solve a
//! small linear system `x_n - sum_m A_nm x_m = b_n`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use super::{mei_dist, StepTrace};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TankResolveError {
    #[error("tanks {tanks:?} are charged only from one another")]
    Cycle { tanks: Vec<usize> },
}

/// Transmission, treatment and distribution parts of an intensity, kWh/m³.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EiParts {
    pub transmission: f64,
    pub treatment: f64,
    pub distribution: f64,
}

impl EiParts {
    pub fn total(&self) -> f64 {
        self.transmission + self.treatment + self.distribution
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TankEnergyState {
    /// Volume received over the horizon, m³.
    pub charged_volume: Vec<f64>,
    /// Volume released over the horizon, m³.
    pub discharged_volume: Vec<f64>,
    pub ei: Vec<EiParts>,
    /// Tanks that never charged and were assigned zero intensity.
    pub uncharged: Vec<usize>,
    /// Largest absolute residual of the tank balance, kWh/m³.
    pub residual: f64,
}

impl TankEnergyState {
    pub fn total_ei(&self, tank: usize) -> f64 {
        self.ei[tank].total()
    }
}

/// Resolves every tank's intensity. `reservoir_eis` lists the transmission
/// and treatment intensities of the reservoirs in source order.
pub fn resolve_tank_ei(
    traces: &[StepTrace],
    reservoir_eis: &[(f64, f64)],
    n_tanks: usize,
) -> Result<TankEnergyState, TankResolveError> {
    let n_res = reservoir_eis.len();
    let mut charged = vec![0.0; n_tanks];
    let mut discharged = vec![0.0; n_tanks];
    // a[n][m]: volume-weighted share of tank m water in tank n's inflow
    let mut a = vec![vec![0.0; n_tanks]; n_tanks];
    let mut b = vec![[0.0; 3]; n_tanks];
    let mut grounded_weight = vec![0.0; n_tanks];

    for tr in traces {
        let snap = &tr.snapshot;
        for n in 0..n_tanks {
            let node = snap.source_nodes[n_res + n];
            let net = snap.net_inflow(node);
            if snap.active[n_res + n] {
                discharged[n] += -net * snap.duration;
                continue;
            }
            if net <= 0.0 || snap.inflow[node] <= 0.0 {
                continue;
            }
            let w = net * snap.duration;
            charged[n] += w;
            for (s, &(trans, treat)) in reservoir_eis.iter().enumerate() {
                let r = tr.fractions.get(s, node);
                if r > 0.0 {
                    b[n][0] += w * r * trans;
                    b[n][1] += w * r * treat;
                    grounded_weight[n] += w * r;
                }
            }
            for s in 0..n_res + n_tanks {
                let r = tr.fractions.get(s, node);
                if r > 0.0 {
                    if let Some(h) = tr.heads.get(s, node) {
                        b[n][2] += w * r * mei_dist(h);
                    }
                }
            }
            for m in 0..n_tanks {
                a[n][m] += w * tr.fractions.get(n_res + m, node);
            }
        }
    }

    let uncharged: Vec<usize> = (0..n_tanks).filter(|&n| charged[n] <= 0.0).collect();
    for n in 0..n_tanks {
        if charged[n] > 0.0 {
            for m in 0..n_tanks {
                a[n][m] /= charged[n];
            }
            for c in &mut b[n] {
                *c /= charged[n];
            }
        }
    }

    // a tank is grounded when its intensity traces back to a reservoir or
    // to a tank whose intensity is fixed
    let mut grounded: Vec<bool> = (0..n_tanks)
        .map(|n| charged[n] <= 0.0 || grounded_weight[n] > 0.0)
        .collect();
    loop {
        let mut changed = false;
        for n in 0..n_tanks {
            if !grounded[n] && (0..n_tanks).any(|m| grounded[m] && a[n][m] > 0.0) {
                grounded[n] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let cycle: Vec<usize> = (0..n_tanks).filter(|&n| !grounded[n]).collect();
    if !cycle.is_empty() {
        return Err(TankResolveError::Cycle { tanks: cycle });
    }

    let unknowns: Vec<usize> = (0..n_tanks).filter(|&n| charged[n] > 0.0).collect();
    let k = unknowns.len();
    let mut ei = vec![EiParts::default(); n_tanks];
    if k > 0 {
        let mut mat = DMatrix::<f64>::identity(k, k);
        let mut rhs = DMatrix::<f64>::zeros(k, 3);
        for (u, &n) in unknowns.iter().enumerate() {
            for (v, &m) in unknowns.iter().enumerate() {
                mat[(u, v)] -= a[n][m];
            }
            for c in 0..3 {
                rhs[(u, c)] = b[n][c];
            }
        }
        let x = mat
            .lu()
            .solve(&rhs)
            .ok_or_else(|| TankResolveError::Cycle { tanks: unknowns.clone() })?;
        for (u, &n) in unknowns.iter().enumerate() {
            ei[n] = EiParts {
                transmission: x[(u, 0)],
                treatment: x[(u, 1)],
                distribution: x[(u, 2)],
            };
        }
    }

    let totals = DVector::from_iterator(n_tanks, ei.iter().map(EiParts::total));
    let residual = (0..n_tanks)
        .filter(|&n| charged[n] > 0.0)
        .map(|n| {
            let mixed: f64 = (0..n_tanks).map(|m| a[n][m] * totals[m]).sum();
            (totals[n] - mixed - b[n].iter().sum::<f64>()).abs()
        })
        .fold(0.0, f64::max);

    Ok(TankEnergyState {
        charged_volume: charged,
        discharged_volume: discharged,
        ei,
        uncharged,
        residual,
    })
}
