//! Physical constants (CODATA 2018) and material defaults.

use std::f64::consts::PI;

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;
pub const STANDARD_GRAVITY: f64 = 9.806_65;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Pascals per millibar.
pub const PA_PER_MBAR: f64 = 100.0;

/// Fused silica, mass density in kg/m³.
pub const FUSED_SILICA_DENSITY: f64 = 2200.0;
/// Fused silica, real relative permittivity near 1064 nm (n ≈ 1.45).
pub const FUSED_SILICA_EPS_REAL: f64 = 2.1;

/// Mean molecular mass of air, 28.97 u.
pub const AIR_MOLECULE_MASS: f64 = 4.81e-26;
pub const AIR_HEAT_CAPACITY_RATIO: f64 = 1.4;

/// Converts an ordinary frequency in Hz to an angular rate in rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    2.0 * PI * hz
}
