//! Pump characteristic curves.
//!
//! Curves reconstructed from a best-efficiency point (BEP) share one
//! dimensionless shape in the flow ratio `q = Q / Q_bep`:
//!
//! ```text
//! H(Q) = H_bep * (4/3 - q^2 / 3)      clamped at 0 for q >= 2
//! eta(Q) = eta_bep * (2q - q^2)       clamped to [ETA_FLOOR, eta_bep]
//! ```
//!
//! The head form coincides with the single-point pump curve convention used
//! by EPANET (shutoff head 4/3 of design head, runout at twice design flow).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lowest efficiency a reconstructed curve reports.
pub const ETA_FLOOR: f64 = 0.10;
/// BEP efficiency assumed when none is supplied.
pub const DEFAULT_BEP_EFF: f64 = 0.75;

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("BEP flow must be positive, got {0}")]
    NonPositiveFlow(f64),
    #[error("BEP head must be positive, got {0}")]
    NonPositiveHead(f64),
    #[error("BEP efficiency must lie in (0, 1], got {0}")]
    BadEfficiency(f64),
    #[error("pump curve needs 1 or 3 points, got {0}")]
    UnsupportedPointCount(usize),
    #[error("pump curve points do not describe a decreasing head curve")]
    NotDecreasing,
}

/// Head-flow and efficiency-flow curves anchored at one BEP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpCurves {
    /// m³/h
    pub bep_flow: f64,
    /// m
    pub bep_head: f64,
    pub bep_eff: f64,
}

/// Builds the dimensionless head and efficiency curves through a BEP.
pub fn reconstruct_pump_curves(
    bep_flow: f64,
    bep_head: f64,
    bep_eff: f64,
) -> Result<PumpCurves, CurveError> {
    if !(bep_flow > 0.0 && bep_flow.is_finite()) {
        return Err(CurveError::NonPositiveFlow(bep_flow));
    }
    if !(bep_head > 0.0 && bep_head.is_finite()) {
        return Err(CurveError::NonPositiveHead(bep_head));
    }
    if !(bep_eff > 0.0 && bep_eff <= 1.0) {
        return Err(CurveError::BadEfficiency(bep_eff));
    }
    Ok(PumpCurves {
        bep_flow,
        bep_head,
        bep_eff,
    })
}

impl PumpCurves {
    pub fn shutoff_head(&self) -> f64 {
        self.bep_head * 4.0 / 3.0
    }

    /// Flow at which the head curve reaches zero.
    pub fn runout_flow(&self) -> f64 {
        2.0 * self.bep_flow
    }

    /// Head gain at flow `q` (m³/h), clamped at zero beyond runout.
    pub fn head_at(&self, q: f64) -> f64 {
        let r = q / self.bep_flow;
        (self.bep_head * (4.0 / 3.0 - r * r / 3.0)).max(0.0)
    }

    pub fn efficiency_at(&self, q: f64) -> f64 {
        let r = q / self.bep_flow;
        (self.bep_eff * (2.0 * r - r * r)).clamp(ETA_FLOOR.min(self.bep_eff), self.bep_eff)
    }
}

/// Three-point head curve fitted as `H = a - b * Q^c` (EPANET convention).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerHeadCurve {
    pub shutoff: f64,
    pub coeff: f64,
    pub exponent: f64,
    /// Flow of the middle point; anchors the efficiency curve.
    pub design_flow: f64,
    pub design_head: f64,
    pub bep_eff: f64,
}

impl PowerHeadCurve {
    /// Fits the curve through `(q0, h0)`, `(q1, h1)`, `(q2, h2)`.
    pub fn fit(points: &[(f64, f64)], bep_eff: f64) -> Result<Self, CurveError> {
        if points.len() != 3 {
            return Err(CurveError::UnsupportedPointCount(points.len()));
        }
        let (q0, h0) = points[0];
        let (q1, h1) = points[1];
        let (q2, h2) = points[2];
        if !(q0 >= 0.0 && q1 > q0 && q2 > q1 && h0 > h1 && h1 > h2 && h2 >= 0.0) {
            return Err(CurveError::NotDecreasing);
        }
        // EPANET's fit assumes the first point sits at zero flow.
        let a = if q0 == 0.0 { h0 } else { return Err(CurveError::NotDecreasing) };
        let h4 = a - h1;
        let h5 = a - h2;
        let c = (h5 / h4).ln() / (q2 / q1).ln();
        if !(c.is_finite() && c > 0.0 && c <= 20.0) {
            return Err(CurveError::NotDecreasing);
        }
        let b = h4 / q1.powf(c);
        if !(bep_eff > 0.0 && bep_eff <= 1.0) {
            return Err(CurveError::BadEfficiency(bep_eff));
        }
        Ok(Self {
            shutoff: a,
            coeff: b,
            exponent: c,
            design_flow: q1,
            design_head: h1,
            bep_eff,
        })
    }

    pub fn head_at(&self, q: f64) -> f64 {
        (self.shutoff - self.coeff * q.max(0.0).powf(self.exponent)).max(0.0)
    }

    pub fn efficiency_at(&self, q: f64) -> f64 {
        let r = q / self.design_flow;
        (self.bep_eff * (2.0 * r - r * r)).clamp(ETA_FLOOR.min(self.bep_eff), self.bep_eff)
    }
}

/// How a pump converts flow into head gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PumpModel {
    /// Curves reconstructed from a best-efficiency point.
    Bep(PumpCurves),
    /// Fitted three-point head curve.
    PowerCurve(PowerHeadCurve),
    /// Constant water power (rated power only), constant efficiency.
    ConstantPower { power_kw: f64, efficiency: f64 },
}

/// Flow (m³/h) below which constant-power pumps switch to a linear
/// extrapolation of their hyperbolic head curve.
const CONSTANT_POWER_MIN_FLOW: f64 = 1.0;

impl PumpModel {
    /// Reported head gain at flow `q` (m³/h).
    pub fn head_at(&self, q: f64) -> f64 {
        match self {
            PumpModel::Bep(c) => c.head_at(q),
            PumpModel::PowerCurve(c) => c.head_at(q),
            PumpModel::ConstantPower { .. } => self.solver_gain(q).0.max(0.0),
        }
    }

    pub fn efficiency_at(&self, q: f64) -> f64 {
        match self {
            PumpModel::Bep(c) => c.efficiency_at(q),
            PumpModel::PowerCurve(c) => c.efficiency_at(q),
            PumpModel::ConstantPower { efficiency, .. } => *efficiency,
        }
    }

    /// Head the pump can hold against at zero flow.
    pub fn shutoff_head(&self) -> f64 {
        match self {
            PumpModel::Bep(c) => c.shutoff_head(),
            PumpModel::PowerCurve(c) => c.shutoff,
            PumpModel::ConstantPower { .. } => self.solver_gain(0.0).0,
        }
    }

    /// Smooth, strictly decreasing head gain used inside the network solve
    /// together with its derivative `dH/dQ` (per m³/h). Unlike
    /// [`PumpModel::head_at`] it is not clamped, so the Newton iteration sees
    /// a pump beyond runout as a resistance.
    pub fn solver_gain(&self, q: f64) -> (f64, f64) {
        match self {
            PumpModel::Bep(c) => {
                let r = q / c.bep_flow;
                let h = c.bep_head * (4.0 / 3.0 - r * r.abs() / 3.0);
                let dh = -2.0 / 3.0 * c.bep_head * r.abs() / c.bep_flow;
                (h, dh)
            }
            PumpModel::PowerCurve(c) => {
                let qa = q.abs();
                let h = c.shutoff - c.coeff * qa.powf(c.exponent) * q.signum();
                let dh = -c.coeff * c.exponent * qa.powf(c.exponent - 1.0);
                (h, if dh.is_finite() { dh } else { 0.0 })
            }
            PumpModel::ConstantPower { power_kw, .. } => {
                // Water power P = rho g Q H with Q in m³/s and P in W.
                let k = power_kw * 1000.0 * crate::units::SECONDS_PER_HOUR
                    / (crate::units::RHO * crate::units::G);
                let q0 = CONSTANT_POWER_MIN_FLOW;
                if q >= q0 {
                    (k / q, -k / (q * q))
                } else {
                    let slope = -k / (q0 * q0);
                    (k / q0 + slope * (q - q0), slope)
                }
            }
        }
    }

    /// Best-efficiency point (flow m³/h, head m) when the model has one.
    pub fn bep(&self) -> Option<(f64, f64)> {
        match self {
            PumpModel::Bep(c) => Some((c.bep_flow, c.bep_head)),
            PumpModel::PowerCurve(c) => Some((c.design_flow, c.design_head)),
            PumpModel::ConstantPower { .. } => None,
        }
    }
}
