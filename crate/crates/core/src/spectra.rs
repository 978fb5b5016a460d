//! Spectral-density kernels and their convolution.
//!
//! All densities use S(ω) = ∫⟨a(t)a(0)⟩e^{jωt}dt, so that ∫S dω/2π is the
//! variance. Quantum kernels are asymmetric in ω.
//!
//! The laser leaving a lens has flat power noise ħω₀P̄_L; a cavity filters
//! its intracavity power noise to (P̄²/N̄)L_κ around the resonance.

use std::f64::consts::PI;

use log::warn;

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_real_line, Feature, Tolerance};
use crate::thermo::thermal_force_psd;

/// L_κ(ζ) = κ/(ζ² + κ²/4). Its integral over ζ is 2π.
#[inline]
pub fn lorentzian(zeta: f64, width: f64) -> f64 {
    width / (zeta * zeta + 0.25 * width * width)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralKernel {
    /// Frequency-independent level, e.g. shot noise ħω₀P̄_L in W²s.
    FlatShotNoise { level: f64 },
    /// magnitude · L_width(ω − center).
    LorentzianPower { magnitude: f64, width: f64, center: f64 },
    /// S_T(ω) of a bath at `temperature` damping a mass at rate `damping`.
    ThermalForce { mass: f64, damping: f64, temperature: f64 },
    /// z_zp² n̄ [L_Γ(ω + ω_z) + L_Γ(ω − ω_z)].
    PositionDoublet {
        zero_point: f64,
        occupation: f64,
        damping: f64,
        frequency: f64,
    },
}

impl SpectralKernel {
    pub fn eval(&self, omega: f64) -> f64 {
        match *self {
            SpectralKernel::FlatShotNoise { level } => level,
            SpectralKernel::LorentzianPower { magnitude, width, center } => magnitude * lorentzian(omega - center, width),
            SpectralKernel::ThermalForce { mass, damping, temperature } => thermal_force_psd(omega, mass, damping, temperature),
            SpectralKernel::PositionDoublet {
                zero_point,
                occupation,
                damping,
                frequency,
            } => {
                zero_point * zero_point
                    * occupation
                    * (lorentzian(omega + frequency, damping) + lorentzian(omega - frequency, damping))
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SpectralKernel::FlatShotNoise { .. } => "flat",
            SpectralKernel::LorentzianPower { .. } => "lorentzian",
            SpectralKernel::ThermalForce { .. } => "thermal_force",
            SpectralKernel::PositionDoublet { .. } => "position_doublet",
        }
    }

    /// Peaks of the kernel, for quadrature breakpoints.
    pub fn features(&self) -> Vec<Feature> {
        match *self {
            SpectralKernel::FlatShotNoise { .. } => Vec::new(),
            SpectralKernel::LorentzianPower { width, center, .. } => vec![Feature { center, width }],
            SpectralKernel::ThermalForce { temperature, .. } => vec![Feature {
                center: 0.0,
                width: (BOLTZMANN * temperature / HBAR).max(1.0),
            }],
            SpectralKernel::PositionDoublet { damping, frequency, .. } => vec![
                Feature { center: -frequency, width: damping },
                Feature { center: frequency, width: damping },
            ],
        }
    }

    /// ∫S dω/2π, or `None` when it diverges.
    pub fn area(&self) -> Option<f64> {
        match *self {
            SpectralKernel::FlatShotNoise { level } => (level == 0.0).then_some(0.0),
            SpectralKernel::LorentzianPower { magnitude, .. } => Some(magnitude),
            SpectralKernel::ThermalForce { damping, .. } => (damping == 0.0).then_some(0.0),
            SpectralKernel::PositionDoublet {
                zero_point, occupation, ..
            } => Some(2.0 * zero_point * zero_point * occupation),
        }
    }
}

/// Which laser power is being described.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerNoiseSource {
    /// Power at the output of a laser at angular frequency ω₀.
    LaserOutput { mean_power: f64, angular_frequency: f64 },
    /// Circulating power of a cavity mode driven `detuning` = ω₀ − ω_R
    /// from resonance.
    Intracavity {
        mean_power: f64,
        photon_number: f64,
        linewidth: f64,
        detuning: f64,
    },
}

/// A power-noise kernel and the drive model it assumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNoise {
    pub kernel: SpectralKernel,
    /// Both kernels assume a coherent-state drive.
    pub coherent_drive: bool,
}

pub fn power_noise_psd(source: PowerNoiseSource) -> PowerNoise {
    let kernel = match source {
        PowerNoiseSource::LaserOutput {
            mean_power,
            angular_frequency,
        } => SpectralKernel::FlatShotNoise {
            level: HBAR * angular_frequency * mean_power,
        },
        PowerNoiseSource::Intracavity {
            mean_power,
            photon_number,
            linewidth,
            detuning,
        } => SpectralKernel::LorentzianPower {
            magnitude: if photon_number > 0.0 {
                mean_power * mean_power / photon_number
            } else {
                0.0
            },
            width: linewidth,
            center: -detuning,
        },
    };
    PowerNoise {
        kernel,
        coherent_drive: true,
    }
}

/// Zero-point amplitude √(ħ/(2Mω)).
pub fn zero_point_amplitude(mass: f64, frequency: f64) -> f64 {
    (HBAR / (2.0 * mass * frequency)).sqrt()
}

/// Bose occupation at angular frequency ω and temperature T.
pub fn thermal_occupation(frequency: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * frequency / (BOLTZMANN * temperature)).exp_m1()
}

/// Position spectral density kernel of a damped oscillator in a thermal
/// bath.
pub fn position_kernel(mass: f64, damping: f64, frequency: f64, temperature: f64) -> SpectralKernel {
    if damping > 0.1 * frequency {
        warn!("damping {damping:e} rad/s is not small against trap frequency {frequency:e} rad/s");
    }
    SpectralKernel::PositionDoublet {
        zero_point: zero_point_amplitude(mass, frequency),
        occupation: thermal_occupation(frequency, temperature),
        damping,
        frequency,
    }
}

pub fn position_psd(omega: f64, mass: f64, damping: f64, frequency: f64, temperature: f64) -> f64 {
    position_kernel(mass, damping, frequency, temperature).eval(omega)
}

/// rms displacement z_zp√(2n̄ + 1).
pub fn phonons_to_rms(occupation: f64, mass: f64, frequency: f64) -> f64 {
    zero_point_amplitude(mass, frequency) * (2.0 * occupation + 1.0).sqrt()
}

/// One additive term of a kernel as a function of the offset from its
/// centre; `width` is zero for a flat term.
#[derive(Debug, Clone, Copy)]
struct Component {
    center: f64,
    width: f64,
    scale: f64,
}

impl Component {
    #[inline]
    fn eval(&self, offset: f64) -> f64 {
        if self.width == 0.0 {
            self.scale
        } else {
            self.scale * lorentzian(offset, self.width)
        }
    }
}

fn components(k: &SpectralKernel) -> Option<Vec<Component>> {
    match *k {
        SpectralKernel::FlatShotNoise { level } => Some(vec![Component { center: 0.0, width: 0.0, scale: level }]),
        SpectralKernel::LorentzianPower { magnitude, width, center } => Some(vec![Component {
            center,
            width,
            scale: magnitude,
        }]),
        SpectralKernel::PositionDoublet {
            zero_point,
            occupation,
            damping,
            frequency,
        } => {
            let scale = zero_point * zero_point * occupation;
            Some(vec![
                Component { center: -frequency, width: damping, scale },
                Component { center: frequency, width: damping, scale },
            ])
        }
        SpectralKernel::ThermalForce { .. } => None,
    }
}

/// (1/2π)∫a(ω′)b(ω − ω′)dω′ over the whole line.
pub fn convolve_psd(a: &SpectralKernel, b: &SpectralKernel, omega: f64) -> Result<f64> {
    convolve_with(a, b, omega, Tolerance::default())
}

pub fn convolve_with(a: &SpectralKernel, b: &SpectralKernel, omega: f64, tol: Tolerance) -> Result<f64> {
    convolve_offset(a, b, omega, 0.0, tol)
}

/// The convolution at ω = `base` + `shift`.
///
/// Each peak of the narrower kernel is integrated in its own offset
/// coordinate and ω − centre is formed as (base − centre) + shift, so a
/// peak far narrower than the float spacing at its centre is still
/// resolved when `base` is that centre.
pub fn convolve_offset(a: &SpectralKernel, b: &SpectralKernel, base: f64, shift: f64, tol: Tolerance) -> Result<f64> {
    for k in [a, b] {
        if k.area().is_none() && !matches!(k, SpectralKernel::FlatShotNoise { .. }) {
            return Err(Error::Validity(format!("{} kernel is not integrable", k.kind())));
        }
    }
    if a.area().is_none() && b.area().is_none() {
        return Err(Error::Validity("convolution of two flat kernels diverges".into()));
    }
    // a⊗b and b⊗a run the same computation; the narrower kernel is the
    // one split into peaks
    let (a, b) = if canonical_order(a, b) { (a, b) } else { (b, a) };
    let parts = components(b).expect("integrable kernels decompose");
    let a_features = a.features();
    let a_reach: f64 = a_features.iter().map(|f| f.center.abs() + f.width).sum();
    let mut total = 0.0;
    for part in parts {
        // y is the offset from this peak; a is evaluated at ω − centre − y
        let d = (base - part.center) + shift;
        let mut features: Vec<Feature> = a_features
            .iter()
            .map(|f| Feature {
                center: d - f.center,
                width: f.width,
            })
            .collect();
        if part.width > 0.0 {
            features.push(Feature { center: 0.0, width: part.width });
        }
        let span = 10.0 * (a_reach + part.width + d.abs());
        total += integrate_real_line(|y| a.eval(d - y) * part.eval(y), &features, Some(span), tol)?;
    }
    Ok(total / (2.0 * PI))
}

fn narrowest(k: &SpectralKernel) -> f64 {
    k.features().iter().map(|f| f.width).fold(f64::INFINITY, f64::min)
}

fn canonical_order(a: &SpectralKernel, b: &SpectralKernel) -> bool {
    match narrowest(b).total_cmp(&narrowest(a)) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => format!("{a:?}") <= format!("{b:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_real_line;

    #[test]
    fn lorentzian_values() {
        let k = 3.0e5;
        assert_eq!(lorentzian(0.0, k), 4.0 / k);
        assert!((lorentzian(k / 2.0, k) - 2.0 / k).abs() < 1e-20);
        let area = integrate_real_line(|x| lorentzian(x, k), &[Feature { center: 0.0, width: k }], None, Tolerance::default())
            .unwrap();
        assert!((area / (2.0 * PI) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn power_noise_kernels() {
        let flat = power_noise_psd(PowerNoiseSource::LaserOutput {
            mean_power: 0.1,
            angular_frequency: 1.77e15,
        });
        assert!(flat.coherent_drive);
        assert_eq!(flat.kernel.eval(-5e5), HBAR * 1.77e15 * 0.1);
        let cav = power_noise_psd(PowerNoiseSource::Intracavity {
            mean_power: 55.0,
            photon_number: 1e10,
            linewidth: 1e6,
            detuning: 0.0,
        });
        let mag = 55.0 * 55.0 / 1e10;
        assert!((cav.kernel.eval(0.0) - mag * 4.0 / 1e6).abs() < 1e-12 * mag * 4.0 / 1e6);
        let f = cav.kernel;
        let area = integrate_real_line(|x| f.eval(x), &f.features(), None, Tolerance::default()).unwrap();
        assert!((area / (2.0 * PI * mag) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn doublet_area_and_peaks() {
        let k = position_kernel(4.5e-17, 1.0, 1.2e6, 530.0);
        let SpectralKernel::PositionDoublet { zero_point, occupation, .. } = k else {
            unreachable!()
        };
        let area = integrate_real_line(|x| k.eval(x), &k.features(), None, Tolerance::default()).unwrap();
        let expect = 2.0 * zero_point * zero_point * occupation;
        assert!((area / (2.0 * PI) / expect - 1.0).abs() < 1e-6);
        assert!(k.eval(1.2e6) > k.eval(1.2e6 + 0.5));
        assert!(k.eval(-1.2e6) > k.eval(-1.2e6 - 0.5));
        assert_eq!(position_kernel(4.5e-17, 1.0, 1.2e6, 0.0).eval(1.2e6), 0.0);
    }

    #[test]
    fn ground_state_rms() {
        let z = phonons_to_rms(0.0, 1e-17, 1e6);
        assert_eq!(z, zero_point_amplitude(1e-17, 1e6));
    }

    #[test]
    fn lorentzians_convolve_to_lorentzian() {
        let a = SpectralKernel::LorentzianPower { magnitude: 1.0, width: 2.0, center: 0.0 };
        let b = SpectralKernel::LorentzianPower { magnitude: 1.0, width: 5.0, center: 0.0 };
        for w in [0.0, 1.0, 7.5, -30.0] {
            let c = convolve_psd(&a, &b, w).unwrap();
            assert!((c / lorentzian(w, 7.0) - 1.0).abs() < 1e-6, "{w}: {c}");
        }
    }

    #[test]
    fn flat_convolution_scales_area() {
        let flat = SpectralKernel::FlatShotNoise { level: 3.0 };
        let b = SpectralKernel::LorentzianPower { magnitude: 2.0, width: 1e3, center: 50.0 };
        let c = convolve_psd(&flat, &b, 1e4).unwrap();
        assert!((c / 6.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn convolution_commutes() {
        let a = position_kernel(4.5e-17, 2.5e-5, 1.2e6, 530.0);
        let b = SpectralKernel::LorentzianPower { magnitude: 1.0, width: 2.0 * PI * 1.8e5, center: 0.0 };
        for w in [1.2e6, -1.2e6, 3e5] {
            let ab = convolve_psd(&a, &b, w).unwrap();
            let ba = convolve_psd(&b, &a, w).unwrap();
            assert!((ab - ba).abs() <= 1e-10 * ab.abs(), "{ab} vs {ba}");
        }
    }

    #[test]
    fn non_integrable_kernels_rejected() {
        let t = SpectralKernel::ThermalForce { mass: 1e-17, damping: 1.0, temperature: 300.0 };
        let l = SpectralKernel::LorentzianPower { magnitude: 1.0, width: 1.0, center: 0.0 };
        assert!(matches!(convolve_psd(&t, &l, 0.0), Err(Error::Validity(_))));
        let f = SpectralKernel::FlatShotNoise { level: 1.0 };
        assert!(matches!(convolve_psd(&f, &f, 0.0), Err(Error::Validity(_))));
    }
}
