use thiserror::Error;

use crate::units::{G, RHO, SECONDS_PER_HOUR};

pub const HW_COEFF: f64 = 10.67;
pub const HW_FLOW_EXP: f64 = 1.852;
pub const HW_DIAM_EXP: f64 = 4.87;

/// Hazen-Williams head loss (m) for length `l` (m), flow `q` (m³/s),
/// diameter `d` (m) and roughness coefficient `c`.
pub fn hazen_williams_headloss(l: f64, q: f64, d: f64, c: f64) -> f64 {
    debug_assert!(l > 0.0 && d > 0.0 && c > 0.0 && q >= 0.0);
    HW_COEFF * l * q.powf(HW_FLOW_EXP) / (c.powf(HW_FLOW_EXP) * d.powf(HW_DIAM_EXP))
}

/// Resistance `r` such that `h = r * Q^1.852` with `Q` in m³/h.
pub fn hazen_williams_resistance_m3h(l: f64, d: f64, c: f64) -> f64 {
    HW_COEFF * l / (c.powf(HW_FLOW_EXP) * d.powf(HW_DIAM_EXP)) / SECONDS_PER_HOUR.powf(HW_FLOW_EXP)
}

#[derive(Debug, Error, PartialEq)]
#[error("pump efficiency must lie in (0, 1], got {0}")]
pub struct EfficiencyError(pub f64);

/// Shaft power (kW) drawn by a pump moving `q` m³/h through a head gain of
/// `head_gain` m at mechanical efficiency `eff`.
pub fn pump_power(q: f64, head_gain: f64, eff: f64) -> Result<f64, EfficiencyError> {
    if !(eff > 0.0 && eff <= 1.0) {
        return Err(EfficiencyError(eff));
    }
    Ok(RHO * G * (q / SECONDS_PER_HOUR) * head_gain / eff / 1000.0)
}
