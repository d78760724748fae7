//! Physical constants and unit conversions.
//!
//! Internally every quantity is SI: lengths and heads in metres, flows in
//! m³/h, power in kW, energy in kWh.

/// Density of water, kg/m³.
pub const RHO: f64 = 1000.0;
/// Gravitational acceleration, m/s².
pub const G: f64 = 9.81;

pub const SECONDS_PER_HOUR: f64 = 3600.0;
/// Joules per kWh.
pub const J_PER_KWH: f64 = 3.6e6;

pub const FT_TO_M: f64 = 0.3048;
pub const IN_TO_M: f64 = 0.0254;
pub const MM_TO_M: f64 = 0.001;
/// One US gallon in m³.
pub const US_GAL_M3: f64 = 0.003_785_411_784;
/// One imperial gallon in m³.
pub const IMP_GAL_M3: f64 = 0.004_546_09;
/// One acre-foot in m³.
pub const ACRE_FT_M3: f64 = 1_233.481_837_547_52;
pub const HP_TO_KW: f64 = 0.745_699_871_582_270_2;
/// One psi expressed as metres of water head.
pub const PSI_TO_M: f64 = 0.703_069_579_639_159;

/// 20 psi minimum service pressure as stored in SI (two-decimal rounding).
pub const MIN_PRESSURE_M: f64 = 14.06;

#[inline]
pub fn m3h_to_m3s(q: f64) -> f64 {
    q / SECONDS_PER_HOUR
}

#[inline]
pub fn m3s_to_m3h(q: f64) -> f64 {
    q * SECONDS_PER_HOUR
}

/// Specific energy of a head, kWh per m³ of water lifted through `head` metres.
#[inline]
pub fn head_to_kwh_per_m3(head: f64) -> f64 {
    RHO * G * head / J_PER_KWH
}
