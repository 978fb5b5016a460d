//! Field profiles, polarizability, and the linearised optical force
//! coefficients of the cavity mode and the focused beam.
//!
//! Forces follow the dipole approximation: the gradient force
//! `(α_R/4) ∂|E|²/∂u` and the radiation pressure `(−α_I/2) Im(E ∂E*/∂u)`.
//! [`numeric_force_oracle`] evaluates both by central differences of a
//! sampled profile; every closed-form coefficient below is tested against it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::scenario::{CavityMode, CavitySetup, LensSetup, Particle};

/// Real part α_R = 4πε₀R³(ε_R − 1)/(ε_R + 2), in C·m²/V.
pub fn polarizability_real(p: &Particle) -> f64 {
    4.0 * PI * VACUUM_PERMITTIVITY * p.radius.powi(3) * p.clausius_mossotti()
}

/// Imaginary part α_I = 12πε₀R³[ε_I/(ε_R + 2)² + (2/9)α₀²(k₀R)³].
///
/// The second term is the radiation-reaction contribution and stays
/// positive for a lossless sphere.
pub fn polarizability_imag(p: &Particle, wavelength: f64) -> f64 {
    let k0 = 2.0 * PI / wavelength;
    let a0 = p.clausius_mossotti();
    let absorption = p.eps_imag / (p.eps_real + 2.0).powi(2);
    let reaction = 2.0 / 9.0 * a0 * a0 * (k0 * p.radius).powi(3);
    12.0 * PI * VACUUM_PERMITTIVITY * p.radius.powi(3) * (absorption + reaction)
}

/// A dimensionless complex field profile Ψ(x, y, z).
pub trait FieldProfile {
    fn sample(&self, x: f64, y: f64, z: f64) -> Complex64;
    fn wavelength(&self) -> f64;
}

impl FieldProfile for CavityMode {
    /// Standing-wave Gaussian mode, origin at the resonator centre.
    fn sample(&self, x: f64, y: f64, z: f64) -> Complex64 {
        let zr = self.rayleigh_range();
        let k = self.wavenumber();
        let w = self.waist();
        let s = 1.0 + (z / zr).powi(2);
        let r2 = x * x + y * y;
        let curvature = if z == 0.0 {
            0.0
        } else {
            k * r2 / (2.0 * z * (1.0 + (zr / z).powi(2)))
        };
        let envelope = Complex64::new(-r2 / (w * w * s), curvature).exp() / s.sqrt();
        envelope * (k * z - (z / zr).atan()).cos()
    }

    fn wavelength(&self) -> f64 {
        self.wavelength
    }
}

impl FieldProfile for LensSetup {
    /// Travelling Gaussian beam, origin at the focus.
    fn sample(&self, x: f64, y: f64, z: f64) -> Complex64 {
        let zr = self.rayleigh_range();
        let k = self.wavenumber();
        let w = self.waist();
        let s = 1.0 + (z / zr).powi(2);
        let r2 = x * x + y * y;
        let curvature = if z == 0.0 {
            0.0
        } else {
            k * r2 / (2.0 * z * (1.0 + (zr / z).powi(2)))
        };
        let phase = curvature + k * z - (z / zr).atan();
        Complex64::new(-r2 / (w * w * s), phase).exp() / s.sqrt()
    }

    fn wavelength(&self) -> f64 {
        self.wavelength
    }
}

/// Ψ of the levitating mode of `setup`.
pub fn cavity_profile(x: f64, y: f64, z: f64, setup: &CavitySetup) -> Complex64 {
    setup.levitating_mode().sample(x, y, z)
}

/// Ψ̃ of the focused beam of `setup`.
pub fn beam_profile(x: f64, y: f64, z: f64, setup: &LensSetup) -> Complex64 {
    setup.sample(x, y, z)
}

impl CavityMode {
    /// Antinode of |Ψ| on axis nearest to `z`, i.e. the root of
    /// k_R z − atan(z/z_R) = qπ closest to it.
    pub fn nearest_antinode(&self, z: f64) -> f64 {
        let k = self.wavenumber();
        let zr = self.rayleigh_range();
        let phase = |z: f64| k * z - (z / zr).atan();
        let q = (phase(z) / PI).round();
        let mut zq = z;
        for _ in 0..50 {
            let f = phase(zq) - q * PI;
            let df = k - 1.0 / (zr * (1.0 + (zq / zr).powi(2)));
            let step = f / df;
            zq -= step;
            if step.abs() <= 1e-16 * zq.abs().max(self.wavelength) {
                break;
            }
        }
        zq
    }

    /// On-axis local maximum of |Ψ| nearest to `z`. It differs from
    /// [`nearest_antinode`](Self::nearest_antinode) by the pull of the
    /// envelope, a shift of order z/(k_R² z_R²).
    pub fn intensity_maximum(&self, z: f64) -> f64 {
        let k = self.wavenumber();
        let zr = self.rayleigh_range();
        let mut zq = self.nearest_antinode(z);
        for _ in 0..20 {
            let phase = k * zq - (zq / zr).atan();
            let dphase = k - 1.0 / (zr * (1.0 + (zq / zr).powi(2)));
            // d ln|Ψ|²/dz / 2
            let g = -phase.tan() * dphase - zq / (zr * zr + zq * zq);
            let step = g / (dphase * dphase);
            zq += step;
            if step.abs() <= 1e-18 * zr {
                break;
            }
        }
        zq
    }

    /// |E₀|² at the antinodes of the resonator centre for intracavity
    /// power `power`: 8P/(πε₀c w_R²).
    pub fn peak_field_square(&self, power: f64) -> f64 {
        8.0 * power / (PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * self.waist().powi(2))
    }

    /// Mean intracavity photon number N̄ = P̄d/(ħω_R c).
    pub fn photon_number(&self, power: f64) -> f64 {
        power * self.length / (HBAR * self.resonance_frequency() * SPEED_OF_LIGHT)
    }
}

impl LensSetup {
    /// |E_i|² at the focus: 4P/(πε₀c w̃_R²).
    pub fn peak_field_square(&self, power: f64) -> f64 {
        4.0 * power / (PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * self.waist().powi(2))
    }
}

/// Linearised gradient-force coefficients at a cavity antinode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityCoefficients {
    /// A_G,Z in N/(m·W).
    pub gradient_z: f64,
    /// A_G,X in N/(m·W).
    pub gradient_x: f64,
    /// A_G,Y in N/(m·W).
    pub gradient_y: f64,
    /// G_Zmax in rad/(s·m).
    pub pull_slope_max: f64,
    k: f64,
    zr: f64,
}

impl CavityCoefficients {
    /// G_Z(z) = G_Zmax sin(2k_R z − 2 atan(z/z_R)).
    pub fn pull_slope(&self, z: f64) -> f64 {
        self.pull_slope_max * (2.0 * self.k * z - 2.0 * (z / self.zr).atan()).sin()
    }

    /// Slope of G_Z near an antinode, 2k_R G_Zmax.
    pub fn pull_curvature(&self) -> f64 {
        2.0 * self.k * self.pull_slope_max
    }
}

/// Coefficients of `mode` for a particle at axial position `z_m`.
pub fn mode_coefficients(p: &Particle, mode: &CavityMode, z_m: f64) -> Result<CavityCoefficients> {
    mode.check_validity()?;
    let k = mode.wavenumber();
    let d = mode.length;
    let alpha = polarizability_real(p);
    let s = 1.0 + (2.0 * z_m / d).powi(2);
    let c = SPEED_OF_LIGHT;
    let eps0 = VACUUM_PERMITTIVITY;
    let gradient_z = 4.0 * k.powi(3) * alpha / (PI * eps0 * c * d * s);
    let gradient_x = 8.0 * k * k * alpha / (PI * eps0 * c * d * d * s * s);
    let near_unity = (p.eps_real + 2.0) / (3.0 * p.eps_real);
    let pull_slope_max = gradient_z * near_unity * c * c / (2.0 * d);
    Ok(CavityCoefficients {
        gradient_z,
        gradient_x,
        gradient_y: gradient_x,
        pull_slope_max,
        k,
        zr: mode.rayleigh_range(),
    })
}

/// Coefficients of the levitating mode at the levitation point.
pub fn cavity_coefficients(p: &Particle, setup: &CavitySetup) -> Result<CavityCoefficients> {
    mode_coefficients(p, &setup.levitating_mode(), setup.levitation_offset)
}

/// Resonance shift δω_R(z) caused by the particle on the axis of `mode`,
/// from first-order perturbation of the mode with volume πw_R²d/4.
pub fn frequency_pull(p: &Particle, mode: &CavityMode, z: f64) -> f64 {
    let zr = mode.rayleigh_range();
    let standing = (mode.wavenumber() * z - (z / zr).atan()).cos().powi(2);
    let filling = standing * p.volume() / ((1.0 + (z / zr).powi(2)) * mode.mode_volume());
    -mode.resonance_frequency() * (p.eps_real - 1.0) / (2.0 * p.eps_real) * filling
}

/// Linearised force coefficients at the focus of a lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensCoefficients {
    /// Ã_G,Z in N/(m·W).
    pub gradient_z: f64,
    pub gradient_x: f64,
    pub gradient_y: f64,
    /// Ã_RP,Z in N/W.
    pub radiation_pressure_z: f64,
}

pub fn lens_coefficients(p: &Particle, lens: &LensSetup) -> LensCoefficients {
    let na = lens.numerical_aperture;
    let k0 = lens.wavenumber();
    let denom = PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT;
    let alpha_r = polarizability_real(p);
    let alpha_i = polarizability_imag(p, lens.wavelength);
    let gradient_x = na.powi(4) * k0.powi(4) * alpha_r / (4.0 * denom);
    LensCoefficients {
        gradient_z: na.powi(6) * k0.powi(4) * alpha_r / (8.0 * denom),
        gradient_x,
        gradient_y: gradient_x,
        radiation_pressure_z: na * na * (1.0 - na * na / 2.0) * k0.powi(3) * alpha_i / (2.0 * denom),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Force components along one axis from direct differentiation of a
/// sampled field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleForce {
    pub gradient: f64,
    pub radiation_pressure: f64,
}

/// Default finite-difference step, λ/2000.
pub fn default_step(wavelength: f64) -> f64 {
    wavelength / 2000.0
}

/// Gradient force and radiation pressure along `axis` at `point`, for the
/// field E = E₀Ψ with |E₀|² = `peak_field_square`, by central differences
/// with step `step` (default λ/2000). Steps of λ/100 or more are rejected.
pub fn numeric_force_oracle<F: FieldProfile + ?Sized>(
    p: &Particle,
    profile: &F,
    peak_field_square: f64,
    point: [f64; 3],
    axis: Axis,
    step: Option<f64>,
) -> Result<OracleForce> {
    let wavelength = profile.wavelength();
    let h = step.unwrap_or_else(|| default_step(wavelength));
    if !(h > 0.0) || h >= wavelength / 100.0 {
        return Err(Error::Validity(format!(
            "finite-difference step {h:e} m must be positive and below λ/100"
        )));
    }
    let shifted = |delta: f64| {
        let mut q = point;
        q[axis.index()] += delta;
        profile.sample(q[0], q[1], q[2])
    };
    let plus = shifted(h);
    let minus = shifted(-h);
    let centre = shifted(0.0);
    let d_intensity = (plus.norm_sqr() - minus.norm_sqr()) / (2.0 * h);
    let d_field = (plus - minus) / (2.0 * h);
    let alpha_r = polarizability_real(p);
    let alpha_i = polarizability_imag(p, wavelength);
    Ok(OracleForce {
        gradient: alpha_r / 4.0 * peak_field_square * d_intensity,
        radiation_pressure: -alpha_i / 2.0 * peak_field_square * (centre * d_field.conj()).im,
    })
}
