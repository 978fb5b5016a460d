//! Material, environment and optical set-up records.
//!
//! Every record is plain data in SI units. `validate` checks the physical
//! invariants; [`crate::config::load_scenario`] calls it on everything it
//! builds, so downstream code can assume valid inputs.

use std::f64::consts::PI;

use crate::constants::{
    AIR_HEAT_CAPACITY_RATIO, AIR_MOLECULE_MASS, BOLTZMANN, FUSED_SILICA_DENSITY,
    FUSED_SILICA_EPS_REAL, SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};

/// A dielectric nanosphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    /// Radius in m.
    pub radius: f64,
    /// Mass density in kg/m³.
    pub mass_density: f64,
    /// Real part of the relative permittivity.
    pub eps_real: f64,
    /// Imaginary part of the relative permittivity.
    pub eps_imag: f64,
    /// Thermal accommodation coefficient of gas molecules, in [0, 1].
    pub accommodation: f64,
    /// Planck-weighted emissivity used for thermal radiation.
    pub emissivity: f64,
}

impl Particle {
    /// Fused-silica sphere of the given radius.
    pub fn fused_silica(radius: f64, eps_imag: f64, accommodation: f64) -> Self {
        Particle {
            radius,
            mass_density: FUSED_SILICA_DENSITY,
            eps_real: FUSED_SILICA_EPS_REAL,
            eps_imag,
            accommodation,
            emissivity: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("particle.radius", self.radius)?;
        positive("particle.mass_density", self.mass_density)?;
        if !(self.eps_real > 1.0) || !self.eps_real.is_finite() {
            return Err(Error::invalid("particle.eps_real", "must exceed 1"));
        }
        non_negative("particle.eps_imag", self.eps_imag)?;
        unit_interval("particle.accommodation", self.accommodation)?;
        unit_interval("particle.emissivity", self.emissivity)?;
        Ok(())
    }

    /// Mass M = (4/3)πR³ρ.
    pub fn mass(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3) * self.mass_density
    }

    /// Clausius-Mossotti factor (ε_R − 1)/(ε_R + 2).
    pub fn clausius_mossotti(&self) -> f64 {
        (self.eps_real - 1.0) / (self.eps_real + 2.0)
    }

    pub fn surface_area(&self) -> f64 {
        4.0 * PI * self.radius * self.radius
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }
}

/// Free-function form of [`Particle::mass`].
pub fn particle_mass(p: &Particle) -> f64 {
    p.mass()
}

/// The rarefied gas surrounding the particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasEnvironment {
    /// Ambient pressure in Pa.
    pub pressure: f64,
    /// Ambient temperature in K.
    pub temperature: f64,
    /// Molecular mass in kg.
    pub molecule_mass: f64,
    /// Heat-capacity ratio γ.
    pub heat_capacity_ratio: f64,
}

impl GasEnvironment {
    pub fn air(pressure: f64, temperature: f64) -> Self {
        GasEnvironment {
            pressure,
            temperature,
            molecule_mass: AIR_MOLECULE_MASS,
            heat_capacity_ratio: AIR_HEAT_CAPACITY_RATIO,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("gas.pressure", self.pressure)?;
        positive("gas.temperature", self.temperature)?;
        positive("gas.molecule_mass", self.molecule_mass)?;
        if !(self.heat_capacity_ratio > 1.0) || !self.heat_capacity_ratio.is_finite() {
            return Err(Error::invalid("gas.heat_capacity_ratio", "must exceed 1"));
        }
        Ok(())
    }

    /// Gas mass density ρ = mP/(k_B T).
    pub fn density(&self) -> f64 {
        self.molecule_mass * self.pressure / (BOLTZMANN * self.temperature)
    }

    pub fn with_pressure(&self, pressure: f64) -> Self {
        GasEnvironment { pressure, ..*self }
    }
}

/// One Gaussian mode of a confocal symmetric Fabry-Perot resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    /// Resonator length d in m.
    pub length: f64,
    /// Vacuum wavelength in m.
    pub wavelength: f64,
}

impl CavityMode {
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// z_R = d/2 for the confocal geometry.
    pub fn rayleigh_range(&self) -> f64 {
        self.length / 2.0
    }

    /// w_R = √(d/k_R).
    pub fn waist(&self) -> f64 {
        (self.length / self.wavenumber()).sqrt()
    }

    pub fn resonance_frequency(&self) -> f64 {
        SPEED_OF_LIGHT * self.wavenumber()
    }

    /// Effective mode volume πw_R²d/4.
    pub fn mode_volume(&self) -> f64 {
        PI * self.waist().powi(2) * self.length / 4.0
    }

    /// Validity of the k_R ≫ 1/z_R expansion, enforced as k_R d > 100.
    pub fn check_validity(&self) -> Result<()> {
        let kd = self.wavenumber() * self.length;
        if kd > 100.0 {
            Ok(())
        } else {
            Err(Error::Validity(format!(
                "k_R d = {kd:.3} must exceed 100 for the cavity expansion"
            )))
        }
    }
}

/// Fabry-Perot levitation and sideband-cooling set-up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySetup {
    /// Resonator length d in m.
    pub length: f64,
    /// Levitating-field wavelength in m.
    pub wavelength: f64,
    /// Levitation point measured from the resonator centre, in m.
    pub levitation_offset: f64,
    /// Levitating-mode linewidth κ_lev in rad/s.
    pub lev_linewidth: f64,
    /// Mean intracavity power of the levitating field in W.
    pub lev_power: f64,
    /// Cooling-mode linewidth κ_cool in rad/s.
    pub cool_linewidth: f64,
    /// Mean intracavity power of the cooling field in W.
    pub cool_power: f64,
    /// Cooling-field wavelength in m.
    pub cool_wavelength: f64,
}

impl CavitySetup {
    pub fn levitating_mode(&self) -> CavityMode {
        CavityMode {
            length: self.length,
            wavelength: self.wavelength,
        }
    }

    pub fn cooling_mode(&self) -> CavityMode {
        CavityMode {
            length: self.length,
            wavelength: self.cool_wavelength,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("cavity.length", self.length)?;
        positive("cavity.wavelength", self.wavelength)?;
        positive("cavity.cool_wavelength", self.cool_wavelength)?;
        if !self.levitation_offset.is_finite() || self.levitation_offset.abs() >= self.length / 2.0
        {
            return Err(Error::invalid(
                "cavity.levitation_offset",
                "must lie strictly inside the resonator (|z_m| < d/2)",
            ));
        }
        positive("cavity.lev_linewidth", self.lev_linewidth)?;
        positive("cavity.cool_linewidth", self.cool_linewidth)?;
        non_negative("cavity.lev_power", self.lev_power)?;
        non_negative("cavity.cool_power", self.cool_power)?;
        self.levitating_mode().check_validity()?;
        self.cooling_mode().check_validity()
    }
}

/// Focused Gaussian beam formed by a lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensSetup {
    pub numerical_aperture: f64,
    /// Laser wavelength λ₀ in m.
    pub wavelength: f64,
    /// Mean laser output power in W.
    pub laser_power: f64,
}

impl LensSetup {
    pub fn validate(&self) -> Result<()> {
        let na = self.numerical_aperture;
        if !(na > 0.0 && na < 1.0) {
            return Err(Error::invalid("lens.numerical_aperture", "must lie in (0, 1)"));
        }
        positive("lens.wavelength", self.wavelength)?;
        non_negative("lens.laser_power", self.laser_power)
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn angular_frequency(&self) -> f64 {
        SPEED_OF_LIGHT * self.wavenumber()
    }

    /// z̃_R = 2/(NA² k₀).
    pub fn rayleigh_range(&self) -> f64 {
        2.0 / (self.numerical_aperture.powi(2) * self.wavenumber())
    }

    /// w̃_R = 2/(NA k₀).
    pub fn waist(&self) -> f64 {
        2.0 / (self.numerical_aperture * self.wavenumber())
    }
}

/// Point-like photodetectors behind the focus: one at (X₀, 0, Z₀), one at
/// (0, Y₀, Z₀) and one at (0, 0, Z₀), each of area S_d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorLayout {
    /// Axial distance Z₀ from the focus, in m.
    pub distance: f64,
    pub offset_x: f64,
    pub offset_y: f64,
    /// Detector area S_d in m².
    pub area: f64,
}

impl DetectorLayout {
    /// Quantum efficiency. Fixed.
    pub const EFFICIENCY: f64 = 1.0;
    /// Response time in s. Fixed.
    pub const RESPONSE_TIME: f64 = 0.0;

    /// Layout maximising X₀²S_d and Y₀²S_d at a given distance:
    /// X₀ = Y₀ = √S_d = √(λ₀Z₀/(45π)).
    pub fn near_optimal(wavelength: f64, distance: f64) -> Result<Self> {
        positive("detector.wavelength", wavelength)?;
        if !(distance >= 20.0 * wavelength * (1.0 - 1e-12)) {
            return Err(Error::invalid("detector.distance", "Z0 must be at least 20 wavelengths"));
        }
        let side = (wavelength * distance / (45.0 * PI)).sqrt();
        Ok(DetectorLayout {
            distance,
            offset_x: side,
            offset_y: side,
            area: side * side,
        })
    }

    /// Checks the plane-wave validity conditions for a detector at
    /// wavelength `wavelength`.
    pub fn validate(&self, wavelength: f64) -> Result<()> {
        positive("detector.distance", self.distance)?;
        positive("detector.area", self.area)?;
        if self.distance < 20.0 * wavelength * (1.0 - 1e-12) {
            return Err(Error::invalid("detector.distance", "Z0 must be at least 20 wavelengths"));
        }
        let k0 = 2.0 * PI / wavelength;
        let bound = self.distance / (10.0 * k0);
        if self.offset_x.powi(2) > bound * (1.0 + 1e-12) {
            return Err(Error::invalid("detector.offset_x", "X0^2 must not exceed Z0/(10 k0)"));
        }
        if self.offset_y.powi(2) > bound * (1.0 + 1e-12) {
            return Err(Error::invalid("detector.offset_y", "Y0^2 must not exceed Z0/(10 k0)"));
        }
        positive("detector.offset_x", self.offset_x)?;
        positive("detector.offset_y", self.offset_y)
    }
}

/// Feedback damping rates Γ_FB per axis, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackGains {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FeedbackGains {
    pub fn validate(&self) -> Result<()> {
        non_negative("feedback_gains.x", self.x)?;
        non_negative("feedback_gains.y", self.y)?;
        non_negative("feedback_gains.z", self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optics {
    Cavity(CavitySetup),
    Lens(LensSetup),
}

impl Optics {
    pub fn wavelength(&self) -> f64 {
        match self {
            Optics::Cavity(c) => c.wavelength,
            Optics::Lens(l) => l.wavelength,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub particle: Particle,
    pub gas: GasEnvironment,
    pub optics: Optics,
    pub feedback_gains: Option<FeedbackGains>,
    pub detector: Option<DetectorLayout>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.particle.validate()?;
        self.gas.validate()?;
        match &self.optics {
            Optics::Cavity(c) => {
                c.validate()?;
                if self.feedback_gains.is_some() {
                    return Err(Error::invalid(
                        "feedback_gains",
                        "only allowed together with lens optics",
                    ));
                }
                if self.detector.is_some() {
                    return Err(Error::invalid("detector", "only allowed together with lens optics"));
                }
            }
            Optics::Lens(l) => {
                l.validate()?;
                if let Some(g) = &self.feedback_gains {
                    g.validate()?;
                }
                if let Some(d) = &self.detector {
                    d.validate(l.wavelength)?;
                }
            }
        }
        Ok(())
    }

    pub fn cavity(&self) -> Result<&CavitySetup> {
        match &self.optics {
            Optics::Cavity(c) => Ok(c),
            Optics::Lens(_) => Err(Error::WrongOptics("cavity")),
        }
    }

    pub fn lens(&self) -> Result<&LensSetup> {
        match &self.optics {
            Optics::Lens(l) => Ok(l),
            Optics::Cavity(_) => Err(Error::WrongOptics("lens")),
        }
    }

    /// Same scenario at a different ambient pressure (Pa).
    pub fn with_pressure(&self, pressure: f64) -> Self {
        Scenario {
            gas: self.gas.with_pressure(pressure),
            ..self.clone()
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be non-negative and finite, got {v}")))
    }
}

fn unit_interval(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in [0, 1], got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_scales_cubically() {
        let p = Particle::fused_silica(170e-9, 1e-5, 0.8);
        let q = Particle { radius: 340e-9, ..p };
        assert!((q.mass() / p.mass() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn zero_radius_rejected() {
        let p = Particle::fused_silica(0.0, 1e-5, 0.8);
        assert!(matches!(p.validate(), Err(Error::Validation { field, .. }) if field == "particle.radius"));
    }

    #[test]
    fn accommodation_out_of_range() {
        let p = Particle::fused_silica(170e-9, 1e-5, 1.5);
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("accommodation"));
    }

    #[test]
    fn short_cavity_is_outside_validity() {
        let mode = CavityMode {
            length: 10e-6,
            wavelength: 1064e-9,
        };
        assert!(matches!(mode.check_validity(), Err(Error::Validity(_))));
    }

    #[test]
    fn lens_derived_lengths() {
        let lens = LensSetup {
            numerical_aperture: 0.8,
            wavelength: 1064e-9,
            laser_power: 0.1,
        };
        let k = lens.wavenumber();
        assert!((lens.rayleigh_range() - 2.0 / (0.64 * k)).abs() < 1e-20);
        assert!((lens.waist() - 2.0 / (0.8 * k)).abs() < 1e-20);
    }
}
