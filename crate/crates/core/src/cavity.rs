//! Phonon budget of a nanosphere levitated inside a Fabry-Perot resonator.
//!
//! The levitating mode holds the particle near an antinode at z_m; a weak
//! cooling mode, red-detuned by Ω_Z, adds optomechanical damping Γ_OM.
//! Power fluctuations of the levitating field modulate the trap stiffness,
//! which drives an extra displacement z_G on top of the thermal motion z_T:
//!
//! ```text
//! M z̈_G = −MΓ ż_G − MΩ_Z² z_G − A_G,Z (P_lev − P̄_lev) z_T
//! ```
//!
//! Its closed-form phonon number scales as 1/Γ, so at low pressure it
//! dominates. When the parametric growth rate of the fluctuating
//! stiffness exceeds the damping, the motion has no stationary state and
//! the budget flags the levitation noise as divergent.

use std::f64::consts::PI;

use log::warn;

use crate::error::{Error, Result};
use crate::optics::{cavity_coefficients, mode_coefficients, CavityCoefficients};
use crate::quadrature::{integrate_from, Feature, Tolerance};
use crate::scenario::{CavitySetup, GasEnvironment, Particle, Scenario};
use crate::spectra::{
    convolve_offset, lorentzian, phonons_to_rms, position_kernel, power_noise_psd, thermal_occupation,
    zero_point_amplitude, PowerNoiseSource,
};
use crate::thermo::{thermal_state, ThermalState};

/// Escape threshold as a fraction of the wavelength: beyond λ/8 the
/// harmonic expansion of the cos² trap is off by about 20%.
pub const ESCAPE_FRACTION: f64 = 1.0 / 8.0;

/// Ω_Z = √(A_G,Z P̄_lev / M).
pub fn trap_frequency(p: &Particle, setup: &CavitySetup) -> Result<f64> {
    let c = cavity_coefficients(p, setup)?;
    Ok((c.gradient_z * setup.lev_power / p.mass()).sqrt())
}

/// Mean intracavity photon number P̄d/(ħω c).
pub fn intracavity_photons(power: f64, length: f64, wavelength: f64) -> f64 {
    crate::scenario::CavityMode { length, wavelength }.photon_number(power)
}

/// Γ_OM = 4 z_zp² G² N̄/κ.
pub fn optomechanical_damping(zero_point: f64, pull_slope: f64, linewidth: f64, photons: f64) -> f64 {
    4.0 * zero_point * zero_point * pull_slope * pull_slope * photons / linewidth
}

/// Levitating-field contribution to the phonon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevitationNoise {
    /// n̄_G,Z from the perturbative closed form.
    pub phonons: f64,
    /// n̄_G,Z Γ, which does not depend on pressure.
    pub phonons_times_damping: f64,
    /// Energy growth rate Ω²L_κ(2Ω)/(2N̄) of the fluctuating stiffness.
    pub parametric_rate: f64,
    /// Parametric growth outpaces all damping: no stationary state.
    pub noise_dominated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityDiagnostics {
    /// κ_cool/Ω_Z; the cooling formula assumes it is small.
    pub linewidth_ratio: f64,
    /// Γ/Γ_OM; infinite without a cooling field.
    pub damping_ratio: f64,
    pub parametric_rate: f64,
    pub noise_dominated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityBudget {
    /// Ω_Z in rad/s.
    pub trap_frequency: f64,
    /// Γ in rad/s.
    pub damping: f64,
    /// Γ_OM in rad/s.
    pub optomechanical_damping: f64,
    pub particle_temperature: f64,
    pub effective_temperature: f64,
    /// n̄_T,Z.
    pub thermal_phonons: f64,
    /// n̄_G,Z.
    pub levitation_phonons: f64,
    /// [κ_cool/(4Ω_Z)]², zero without a cooling field.
    pub backaction_floor: f64,
    /// n̄_z.
    pub phonons: f64,
    pub rms_thermal: f64,
    pub rms_levitation: f64,
    /// rms displacement for n̄_z.
    pub rms_total: f64,
    pub lev_photons: f64,
    pub cool_photons: f64,
    pub diagnostics: CavityDiagnostics,
}

/// Everything about a cavity scenario that does not depend on the cooling
/// power or the target occupation.
#[derive(Debug, Clone, PartialEq)]
pub struct CavitySystem {
    pub particle: Particle,
    pub gas: GasEnvironment,
    pub setup: CavitySetup,
    pub coefficients: CavityCoefficients,
    pub cooling_coefficients: CavityCoefficients,
    pub mass: f64,
    pub trap_frequency: f64,
    pub zero_point: f64,
    pub thermal: ThermalState,
}

impl CavitySystem {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let setup = *scenario.cavity()?;
        let particle = scenario.particle;
        let gas = scenario.gas;
        if !(setup.lev_power > 0.0) {
            return Err(Error::invalid("cavity.lev_power", "levitating power must be positive"));
        }
        let coefficients = cavity_coefficients(&particle, &setup)?;
        let cooling_coefficients = mode_coefficients(&particle, &setup.cooling_mode(), setup.levitation_offset)?;
        let mass = particle.mass();
        let trap_frequency = (coefficients.gradient_z * setup.lev_power / mass).sqrt();
        let mode = setup.levitating_mode();
        let envelope = 1.0 / (1.0 + (setup.levitation_offset / mode.rayleigh_range()).powi(2));
        let field = mode.peak_field_square(setup.lev_power) * envelope;
        let thermal = thermal_state(&particle, &gas, field, mode.resonance_frequency())?;
        Ok(CavitySystem {
            particle,
            gas,
            setup,
            coefficients,
            cooling_coefficients,
            mass,
            trap_frequency,
            zero_point: zero_point_amplitude(mass, trap_frequency),
            thermal,
        })
    }

    pub fn damping(&self) -> f64 {
        self.thermal.drag.total
    }

    /// n̄_T,Z at the bath temperature T_eff.
    pub fn thermal_phonons(&self) -> f64 {
        thermal_occupation(self.trap_frequency, self.thermal.drag.effective_temperature)
    }

    pub fn lev_photons(&self) -> f64 {
        self.setup.levitating_mode().photon_number(self.setup.lev_power)
    }

    pub fn cool_photons(&self) -> f64 {
        self.setup.cooling_mode().photon_number(self.setup.cool_power)
    }

    /// Γ_OM per W of cooling power.
    fn damping_per_watt(&self) -> f64 {
        let photons = self.setup.cooling_mode().photon_number(1.0);
        optomechanical_damping(
            self.zero_point,
            self.cooling_coefficients.pull_slope_max,
            self.setup.cool_linewidth,
            photons,
        )
    }

    pub fn optomechanical_damping(&self) -> f64 {
        if self.setup.cool_linewidth > self.trap_frequency / 3.0 && self.setup.cool_power > 0.0 {
            warn!(
                "cooling linewidth is {:.2} of the trap frequency; the sideband formula assumes it is small",
                self.setup.cool_linewidth / self.trap_frequency
            );
        }
        self.damping_per_watt() * self.setup.cool_power
    }

    pub fn backaction_floor(&self) -> f64 {
        (self.setup.cool_linewidth / (4.0 * self.trap_frequency)).powi(2)
    }

    pub fn levitation_noise(&self) -> LevitationNoise {
        let omega = self.trap_frequency;
        let kappa = self.setup.lev_linewidth;
        let photons = self.lev_photons();
        let a = self.coefficients.gradient_z;
        let power = self.setup.lev_power;
        let bracket = lorentzian(0.0, kappa) + lorentzian(2.0 * omega, kappa);
        let per_damping = a * a * self.thermal_phonons() * bracket * power * power
            / (4.0 * photons * self.mass * self.mass * omega * omega);
        let parametric_rate = omega * omega * lorentzian(2.0 * omega, kappa) / (2.0 * photons);
        let total_damping = self.damping() + self.optomechanical_damping();
        LevitationNoise {
            phonons: per_damping / self.damping(),
            phonons_times_damping: per_damping,
            parametric_rate,
            noise_dominated: parametric_rate >= total_damping,
        }
    }

    /// n̄_G,Z by direct integration: the force spectrum is A² times the
    /// convolution of the intracavity power noise with the thermal
    /// position spectrum, filtered by the mechanical susceptibility.
    ///
    /// The integrand is even in ω; the positive half is integrated in
    /// u = ω − Ω so the resonance keeps full precision.
    pub fn levitation_noise_numeric(&self) -> Result<f64> {
        let omega = self.trap_frequency;
        let gamma = self.damping();
        let kappa = self.setup.lev_linewidth;
        let mode = self.setup.levitating_mode();
        let position = position_kernel(self.mass, gamma, omega, self.thermal.drag.effective_temperature);
        let power = power_noise_psd(PowerNoiseSource::Intracavity {
            mean_power: self.setup.lev_power,
            photon_number: mode.photon_number(self.setup.lev_power),
            linewidth: kappa,
            detuning: 0.0,
        })
        .kernel;
        let a = self.coefficients.gradient_z;
        let m = self.mass;
        let inner = Tolerance { rel: 1e-6, ..Tolerance::default() };
        let failure = std::cell::Cell::new(None);
        let integrand = |u: f64| {
            // Ω² − ω² = −u(2Ω + u)
            let detune = u * (2.0 * omega + u);
            let chi2 = 1.0 / (detune * detune + (gamma * (omega + u)).powi(2));
            match convolve_offset(&position, &power, omega, u, inner) {
                Ok(c) => chi2 * a * a * c / (m * m),
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        };
        let features = [
            Feature { center: 0.0, width: gamma },
            Feature { center: -omega, width: kappa },
        ];
        let outer = Tolerance { rel: 1e-4, ..Tolerance::default() };
        let half = integrate_from(integrand, -omega, &features, None, outer)?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let variance = 2.0 * half / (2.0 * PI);
        Ok(variance / (2.0 * self.zero_point * self.zero_point))
    }

    /// Budget with the scenario's cooling power.
    pub fn budget(&self) -> CavityBudget {
        self.budget_with_cooling(self.setup.cool_power)
    }

    pub fn budget_with_cooling(&self, cool_power: f64) -> CavityBudget {
        let system = CavitySystem {
            setup: CavitySetup { cool_power, ..self.setup },
            ..self.clone()
        };
        let gamma = system.damping();
        let gamma_om = system.optomechanical_damping();
        let n_t = system.thermal_phonons();
        let noise = system.levitation_noise();
        let cooled = gamma_om > 0.0;
        let (floor, phonons) = if cooled {
            let floor = system.backaction_floor();
            (floor, floor + (n_t + noise.phonons) * gamma / gamma_om)
        } else {
            (0.0, n_t + noise.phonons)
        };
        if cooled && gamma > 0.1 * gamma_om {
            warn!("drag rate is not small against the optomechanical damping");
        }
        let zp = system.zero_point;
        CavityBudget {
            trap_frequency: system.trap_frequency,
            damping: gamma,
            optomechanical_damping: gamma_om,
            particle_temperature: system.thermal.balance.particle,
            effective_temperature: system.thermal.drag.effective_temperature,
            thermal_phonons: n_t,
            levitation_phonons: noise.phonons,
            backaction_floor: floor,
            phonons,
            rms_thermal: phonons_to_rms(n_t, system.mass, system.trap_frequency),
            rms_levitation: zp * (2.0 * noise.phonons).sqrt(),
            rms_total: phonons_to_rms(phonons, system.mass, system.trap_frequency),
            lev_photons: system.lev_photons(),
            cool_photons: system.cool_photons(),
            diagnostics: CavityDiagnostics {
                linewidth_ratio: system.setup.cool_linewidth / system.trap_frequency,
                damping_ratio: if cooled { gamma / gamma_om } else { f64::INFINITY },
                parametric_rate: noise.parametric_rate,
                noise_dominated: noise.noise_dominated,
            },
        }
    }

    /// Cooling power that brings n̄_z down to `target`.
    pub fn required_cooling_power(&self, target: f64) -> Result<f64> {
        let floor = self.backaction_floor();
        if !(target > floor) {
            return Err(Error::Infeasible(format!(
                "target occupation {target} is not above the backaction floor {floor:.4}"
            )));
        }
        let heating = (self.thermal_phonons() + self.levitation_noise().phonons) * self.damping();
        Ok(heating / (self.damping_per_watt() * (target - floor)))
    }
}

pub fn levitation_noise_phonons(scenario: &Scenario) -> Result<LevitationNoise> {
    Ok(CavitySystem::new(scenario)?.levitation_noise())
}

pub fn cooled_phonon_number(scenario: &Scenario) -> Result<CavityBudget> {
    Ok(CavitySystem::new(scenario)?.budget())
}

pub fn required_cooling_power(scenario: &Scenario, target: f64) -> Result<f64> {
    CavitySystem::new(scenario)?.required_cooling_power(target)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeAssessment {
    pub escaped: bool,
    /// rms displacement over the threshold λ/8.
    pub margin: f64,
    pub threshold: f64,
}

/// Compares the total rms displacement with λ/8. A heuristic: the model
/// itself only holds for small excursions.
pub fn escape_assessment(budget: &CavityBudget, wavelength: f64) -> EscapeAssessment {
    let threshold = wavelength * ESCAPE_FRACTION;
    let rms = (budget.rms_thermal.powi(2) + budget.rms_levitation.powi(2)).sqrt();
    let rms = if budget.optomechanical_damping > 0.0 { budget.rms_total } else { rms };
    EscapeAssessment {
        escaped: rms > threshold,
        margin: rms / threshold,
        threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{bundled, load_scenario, mbar};

    fn kiesel() -> Scenario {
        load_scenario(bundled("kiesel").unwrap()).unwrap()
    }

    #[test]
    fn photons_and_frequency_scale() {
        let n = intracavity_photons(55.0, 11e-3, 1064e-9);
        assert!((n / 1.08e10 - 1.0).abs() < 0.01, "{n}");
        assert_eq!(intracavity_photons(0.0, 11e-3, 1064e-9), 0.0);
        let s = kiesel();
        let base = trap_frequency(&s.particle, s.cavity().unwrap()).unwrap();
        for r in [70e-9, 340e-9] {
            let p = Particle { radius: r, ..s.particle };
            let w = trap_frequency(&p, s.cavity().unwrap()).unwrap();
            assert!((w / base - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_without_cooling_is_sum() {
        let b = cooled_phonon_number(&kiesel()).unwrap();
        assert_eq!(b.optomechanical_damping, 0.0);
        assert_eq!(b.phonons, b.thermal_phonons + b.levitation_phonons);
    }

    #[test]
    fn budget_decomposition_with_cooling() {
        let sys = CavitySystem::new(&kiesel().with_pressure(mbar(1e-8))).unwrap();
        let b = sys.budget_with_cooling(1.0);
        let parts = b.backaction_floor + (b.thermal_phonons + b.levitation_phonons) * b.damping / b.optomechanical_damping;
        assert!((b.phonons - parts).abs() <= 1e-12 * parts);
        assert!(b.optomechanical_damping > 0.0);
        let b2 = sys.budget_with_cooling(2.0);
        assert!((b2.optomechanical_damping / b.optomechanical_damping - 2.0).abs() < 1e-12);
    }

    #[test]
    fn floor_only_budget() {
        let sys = CavitySystem::new(&kiesel()).unwrap();
        let s = CavitySetup {
            cool_linewidth: 0.4 * sys.trap_frequency,
            ..sys.setup
        };
        let sys = CavitySystem { setup: s, ..sys };
        assert!((sys.backaction_floor() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn infeasible_target() {
        let sys = CavitySystem::new(&kiesel().with_pressure(mbar(1e-7))).unwrap();
        let floor = sys.backaction_floor();
        assert!(matches!(sys.required_cooling_power(floor * 0.5), Err(Error::Infeasible(_))));
        let p = sys.required_cooling_power(1.0).unwrap();
        let b = sys.budget_with_cooling(p);
        assert!((b.phonons - 1.0).abs() < 1e-9);
    }

    #[test]
    fn levitation_noise_scales_inversely_with_drag() {
        let a = CavitySystem::new(&kiesel().with_pressure(mbar(1e-6))).unwrap().levitation_noise();
        let b = CavitySystem::new(&kiesel().with_pressure(mbar(1e-7))).unwrap().levitation_noise();
        assert!((b.phonons_times_damping / a.phonons_times_damping - 1.0).abs() < 1e-6);
        assert!(b.phonons > 9.0 * a.phonons);
    }

    #[test]
    fn zero_rms_does_not_escape() {
        let mut b = cooled_phonon_number(&kiesel()).unwrap();
        b.rms_thermal = 0.0;
        b.rms_levitation = 0.0;
        let e = escape_assessment(&b, 1064e-9);
        assert!(!e.escaped);
        assert_eq!(e.margin, 0.0);
    }

    #[test]
    fn lens_scenario_rejected() {
        let s = load_scenario(bundled("gieseler").unwrap()).unwrap();
        assert!(matches!(CavitySystem::new(&s), Err(Error::WrongOptics(_))));
    }
}
