//! Phonon budget of a nanosphere held at the focus of a lens and
//! cold-damped by feedback on the laser power.
//!
//! Without feedback each axis carries thermal phonons plus the
//! contributions of the laser's shot noise through the gradient force and
//! radiation pressure. Ideal velocity feedback Γ_FB scales all of them by
//! C₁ = Γ/(Γ + Γ_FB), but a real detector adds imprecision noise that grows
//! with the gain, so every axis has an optimum Γ_FB.
//!
//! Three point detectors sit at (X₀, 0, Z₀), (0, Y₀, Z₀) and (0, 0, Z₀),
//! each seeing one plane wave of the transmitted beam plus the light
//! scattered by the particle. Each axis is filtered to its own detector.

use num_complex::Complex64;

use log::warn;

use crate::constants::{HBAR, SPEED_OF_LIGHT, STANDARD_GRAVITY, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::optics::{lens_coefficients, Axis, LensCoefficients};
use crate::optimize::{minimize_log, LogScan};
use crate::scenario::{DetectorLayout, FeedbackGains, GasEnvironment, LensSetup, Particle, Scenario};
use crate::spectra::{phonons_to_rms, thermal_occupation, zero_point_amplitude};
use crate::thermo::{thermal_state, ThermalState};

/// Default detector distance in wavelengths.
pub const DEFAULT_DISTANCE_WAVELENGTHS: f64 = 20.0;
/// Points in the coarse gain scan.
pub const COARSE_POINTS: usize = 64;
/// Gain search interval as fractions of the trap frequency.
pub const GAIN_RANGE: (f64, f64) = (1e-9, 10.0);

/// One value per Cartesian axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerAxis<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Copy> PerAxis<T> {
    pub fn get(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Axis) -> T) -> Self {
        PerAxis {
            x: f(Axis::X),
            y: f(Axis::Y),
            z: f(Axis::Z),
        }
    }
}

impl From<FeedbackGains> for PerAxis<f64> {
    fn from(g: FeedbackGains) -> Self {
        PerAxis { x: g.x, y: g.y, z: g.z }
    }
}

/// Ω̃ = √(Ã_G P̄_L / M) per axis.
pub fn feedback_trap_frequencies(p: &Particle, lens: &LensSetup) -> PerAxis<f64> {
    let c = lens_coefficients(p, lens);
    let m = p.mass();
    PerAxis {
        x: (c.gradient_x * lens.laser_power / m).sqrt(),
        y: (c.gradient_y * lens.laser_power / m).sqrt(),
        z: (c.gradient_z * lens.laser_power / m).sqrt(),
    }
}

/// Displacement of the levitation point from the focus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumShifts {
    /// z̄_RP = Ã_RP,Z/Ã_G,Z along the beam, in m.
    pub radiation_pressure_z: f64,
    /// ȳ_W = Mg/(Ã_G,Y P̄_L) downwards, in m.
    pub gravity_y: f64,
}

pub fn equilibrium_shifts(p: &Particle, lens: &LensSetup) -> EquilibriumShifts {
    equilibrium_shifts_with_gravity(p, lens, STANDARD_GRAVITY)
}

pub fn equilibrium_shifts_with_gravity(p: &Particle, lens: &LensSetup, gravity: f64) -> EquilibriumShifts {
    let c = lens_coefficients(p, lens);
    EquilibriumShifts {
        radiation_pressure_z: c.radiation_pressure_z / c.gradient_z,
        gravity_y: p.mass() * gravity / (c.gradient_y * lens.laser_power),
    }
}

/// X₀ = Y₀ = √S_d = √(λ₀Z₀/(45π)).
pub fn detector_geometry(wavelength: f64, distance: f64) -> Result<DetectorLayout> {
    DetectorLayout::near_optimal(wavelength, distance)
}

/// Slack in the plane-wave validity conditions of a layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutMargins {
    /// Z₀/(20λ₀).
    pub distance: f64,
    /// [Z₀/(10k₀)]/X₀².
    pub offset_x: f64,
    pub offset_y: f64,
}

pub fn layout_margins(layout: &DetectorLayout, wavelength: f64) -> LayoutMargins {
    let k0 = 2.0 * std::f64::consts::PI / wavelength;
    let bound = layout.distance / (10.0 * k0);
    LayoutMargins {
        distance: layout.distance / (20.0 * wavelength),
        offset_x: bound / layout.offset_x.powi(2),
        offset_y: bound / layout.offset_y.powi(2),
    }
}

/// Mean power on each detector, P̄_d = 2z̃_R²S_dP̄_L/(πZ₀²w̃_R²).
pub fn detector_power(lens: &LensSetup, layout: &DetectorLayout) -> f64 {
    let zr = lens.rayleigh_range();
    let w = lens.waist();
    2.0 * zr * zr * layout.area * lens.laser_power / (std::f64::consts::PI * layout.distance.powi(2) * w * w)
}

/// Field at a detector at (X₀, Y₀, Z₀) when the particle is displaced by
/// `displacement` from the levitation point:
///
/// ```text
/// E_d = −(j/Z₀) E_i [z̃_R + α₀k₀²R³(k₀X₀x/Z₀ + k₀Y₀y/Z₀ + z/z̃_R)]
/// ```
///
/// with E_i real and |E_i|² = 4P̄_L/(πε₀c w̃_R²).
pub fn detector_field(
    p: &Particle,
    lens: &LensSetup,
    detector: [f64; 3],
    displacement: [f64; 3],
) -> Complex64 {
    let [x0, y0, z0] = detector;
    let [x, y, z] = displacement;
    let k0 = lens.wavenumber();
    let zr = lens.rayleigh_range();
    let e_i = lens.peak_field_square(lens.laser_power).sqrt();
    let scattering = p.clausius_mossotti() * k0 * k0 * p.radius.powi(3);
    let bracket = zr + scattering * (k0 * x0 * x / z0 + k0 * y0 * y / z0 + z / zr);
    Complex64::new(0.0, -1.0) * (e_i / z0) * bracket
}

/// Power on a detector of area `area` for the field `field`.
pub fn field_power(field: Complex64, area: f64) -> f64 {
    VACUUM_PERMITTIVITY * SPEED_OF_LIGHT / 2.0 * field.norm_sqr() * area
}

/// Shot-noise-limited imprecision S_u = [P̄_d/(∂P_d/∂u)]² ħω₀/P̄_d in m²s.
pub fn imprecision(p: &Particle, lens: &LensSetup, layout: &DetectorLayout, axis: Axis) -> f64 {
    let k0 = lens.wavenumber();
    let zr = lens.rayleigh_range();
    let a0r3 = p.clausius_mossotti() * p.radius.powi(3);
    let lever = match axis {
        Axis::X => zr * layout.distance / (2.0 * a0r3 * k0.powi(3) * layout.offset_x),
        Axis::Y => zr * layout.distance / (2.0 * a0r3 * k0.powi(3) * layout.offset_y),
        Axis::Z => zr * zr / (2.0 * a0r3 * k0 * k0),
    };
    lever * lever * HBAR * lens.angular_frequency() / detector_power(lens, layout)
}

/// Shot-noise phonons C₂ S_u with C₂ = (MΓ_FBΩ̃)²/[2M(Γ + Γ_FB)ħΩ̃].
pub fn shot_noise_phonon(mass: f64, damping: f64, gain: f64, frequency: f64, imprecision: f64) -> f64 {
    if gain == 0.0 {
        return 0.0;
    }
    let c2 = (mass * gain * frequency).powi(2) / (2.0 * mass * (damping + gain) * HBAR * frequency);
    c2 * imprecision
}

/// Quantum-noise phonons without feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumNoise {
    /// n̄_G per axis.
    pub gradient: PerAxis<f64>,
    /// n̄_RP along the beam; transverse radiation pressure is negligible.
    pub radiation_pressure_z: f64,
    /// Both assume the flat shot-noise spectrum of a coherent laser.
    pub flat_laser_noise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBudget {
    /// Ω̃ in rad/s.
    pub frequency: f64,
    /// Γ_FB in rad/s.
    pub gain: f64,
    pub thermal: f64,
    pub gradient: f64,
    pub radiation_pressure: f64,
    /// C₁ = Γ/(Γ + Γ_FB).
    pub suppression: f64,
    /// n̄₁ = C₁(n̄_T + n̄_G + n̄_RP).
    pub ideal: f64,
    /// n̄₂.
    pub shot: f64,
    pub total: f64,
    pub rms: f64,
    /// √(⟨z_G²⟩ + ⟨z_RP²⟩) without feedback.
    pub rms_quantum: f64,
    pub modulation_index: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackBudget {
    pub axes: PerAxis<AxisBudget>,
    pub shifts: EquilibriumShifts,
    /// P̄_d in W.
    pub detector_power: f64,
    /// Γ in rad/s.
    pub damping: f64,
    pub particle_temperature: f64,
    pub effective_temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainOptimum {
    pub gain: f64,
    pub phonons: f64,
    pub rms: f64,
    pub modulation_index: f64,
}

/// Lens scenario with its detector layout resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackSystem {
    pub particle: Particle,
    pub gas: GasEnvironment,
    pub lens: LensSetup,
    pub layout: DetectorLayout,
    pub coefficients: LensCoefficients,
    pub mass: f64,
    pub frequencies: PerAxis<f64>,
    pub thermal: ThermalState,
    pub gains: PerAxis<f64>,
}

impl FeedbackSystem {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let lens = *scenario.lens()?;
        if !(lens.laser_power > 0.0) {
            return Err(Error::invalid("lens.laser_power", "laser power must be positive"));
        }
        let layout = match scenario.detector {
            Some(d) => d,
            None => detector_geometry(lens.wavelength, DEFAULT_DISTANCE_WAVELENGTHS * lens.wavelength)?,
        };
        let particle = scenario.particle;
        let field = lens.peak_field_square(lens.laser_power);
        let thermal = thermal_state(&particle, &scenario.gas, field, lens.angular_frequency())?;
        let frequencies = feedback_trap_frequencies(&particle, &lens);
        let gamma = thermal.drag.total;
        if (frequencies.y - frequencies.z).abs() <= 10.0 * gamma {
            warn!("y and z trap frequencies are within 10 drag rates of each other");
        }
        Ok(FeedbackSystem {
            particle,
            gas: scenario.gas,
            lens,
            layout,
            coefficients: lens_coefficients(&particle, &lens),
            mass: particle.mass(),
            frequencies,
            thermal,
            gains: scenario.feedback_gains.map(PerAxis::from).unwrap_or_default(),
        })
    }

    pub fn damping(&self) -> f64 {
        self.thermal.drag.total
    }

    fn gradient_coefficient(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.coefficients.gradient_x,
            Axis::Y => self.coefficients.gradient_y,
            Axis::Z => self.coefficients.gradient_z,
        }
    }

    pub fn thermal_phonons(&self, axis: Axis) -> f64 {
        thermal_occupation(self.frequencies.get(axis), self.thermal.drag.effective_temperature)
    }

    pub fn quantum_noise(&self) -> QuantumNoise {
        let m = self.mass;
        let gamma = self.damping();
        let w0 = self.lens.angular_frequency();
        let pl = self.lens.laser_power;
        let gradient = PerAxis::from_fn(|axis| {
            let a = self.gradient_coefficient(axis);
            let omega = self.frequencies.get(axis);
            a * a * self.thermal_phonons(axis) * HBAR * w0 * pl / (2.0 * m * m * omega * omega * gamma)
        });
        let arp = self.coefficients.radiation_pressure_z;
        QuantumNoise {
            gradient,
            radiation_pressure_z: arp * arp * w0 * pl / (2.0 * m * self.frequencies.z * gamma),
            flat_laser_noise: true,
        }
    }

    pub fn detector_power(&self) -> f64 {
        detector_power(&self.lens, &self.layout)
    }

    pub fn imprecision(&self, axis: Axis) -> f64 {
        imprecision(&self.particle, &self.lens, &self.layout, axis)
    }

    pub fn shot_noise_phonons(&self, gains: PerAxis<f64>) -> PerAxis<f64> {
        PerAxis::from_fn(|axis| {
            shot_noise_phonon(
                self.mass,
                self.damping(),
                gains.get(axis),
                self.frequencies.get(axis),
                self.imprecision(axis),
            )
        })
    }

    fn axis_budget(&self, axis: Axis, gain: f64, noise: &QuantumNoise) -> AxisBudget {
        let gamma = self.damping();
        let omega = self.frequencies.get(axis);
        let thermal = self.thermal_phonons(axis);
        let gradient = noise.gradient.get(axis);
        let radiation_pressure = if axis == Axis::Z { noise.radiation_pressure_z } else { 0.0 };
        let suppression = gamma / (gamma + gain);
        let ideal = suppression * (thermal + gradient + radiation_pressure);
        let shot = shot_noise_phonon(self.mass, gamma, gain, omega, self.imprecision(axis));
        let total = ideal + shot;
        AxisBudget {
            frequency: omega,
            gain,
            thermal,
            gradient,
            radiation_pressure,
            suppression,
            ideal,
            shot,
            total,
            rms: phonons_to_rms(total, self.mass, omega),
            rms_quantum: zero_point_amplitude(self.mass, omega) * (2.0 * (gradient + radiation_pressure)).sqrt(),
            modulation_index: gain / omega,
        }
    }

    /// n̄ along `axis` at gain `gain`.
    pub fn phonons_at(&self, axis: Axis, gain: f64) -> f64 {
        self.axis_budget(axis, gain, &self.quantum_noise()).total
    }

    pub fn budget(&self) -> FeedbackBudget {
        self.budget_with_gains(self.gains)
    }

    pub fn budget_with_gains(&self, gains: PerAxis<f64>) -> FeedbackBudget {
        let noise = self.quantum_noise();
        FeedbackBudget {
            axes: PerAxis::from_fn(|axis| self.axis_budget(axis, gains.get(axis), &noise)),
            shifts: equilibrium_shifts(&self.particle, &self.lens),
            detector_power: self.detector_power(),
            damping: self.damping(),
            particle_temperature: self.thermal.balance.particle,
            effective_temperature: self.thermal.drag.effective_temperature,
        }
    }

    /// Gain search interval for `axis`, in rad/s.
    pub fn gain_range(&self, axis: Axis) -> (f64, f64) {
        let omega = self.frequencies.get(axis);
        (GAIN_RANGE.0 * omega, GAIN_RANGE.1 * omega)
    }

    /// Gain minimising n̄ along `axis`: a 64-point log scan, then
    /// golden-section refinement to 1e-3 relative.
    pub fn optimize_gain(&self, axis: Axis) -> Result<GainOptimum> {
        let noise = self.quantum_noise();
        let f = |g: f64| self.axis_budget(axis, g, &noise).total;
        let (lo, hi) = self.gain_range(axis);
        let gain = minimize_log(f, lo, hi, COARSE_POINTS, 1e-3)?;
        let b = self.axis_budget(axis, gain, &noise);
        Ok(GainOptimum {
            gain,
            phonons: b.total,
            rms: b.rms,
            modulation_index: b.modulation_index,
        })
    }

    /// n̄ sampled on a log grid over the gain search interval.
    pub fn gain_scan(&self, axis: Axis, points: usize) -> LogScan {
        let noise = self.quantum_noise();
        let (lo, hi) = self.gain_range(axis);
        LogScan::new(|g| self.axis_budget(axis, g, &noise).total, lo, hi, points)
    }
}

pub fn quantum_noise_phonons(scenario: &Scenario) -> Result<QuantumNoise> {
    Ok(FeedbackSystem::new(scenario)?.quantum_noise())
}

pub fn total_phonons(scenario: &Scenario, gains: PerAxis<f64>) -> Result<FeedbackBudget> {
    Ok(FeedbackSystem::new(scenario)?.budget_with_gains(gains))
}

pub fn optimize_feedback_gain(scenario: &Scenario, axis: Axis) -> Result<GainOptimum> {
    FeedbackSystem::new(scenario)?.optimize_gain(axis)
}

/// Growth in sensitivity to feedback-circuit noise when the modulation
/// index drops from `index_ref` to `index`: (index_ref/index)².
pub fn thermal_sensitivity(index_ref: f64, index: f64) -> Result<f64> {
    if !(index_ref > 0.0 && index > 0.0) {
        return Err(Error::invalid("modulation_index", "both indices must be positive"));
    }
    Ok((index_ref / index).powi(2))
}
