//! Gas damping, bath temperature and the particle's surface temperature.
//!
//! Molecules hitting the sphere carry the ambient temperature T^A; those
//! leaving it have partly accommodated to the surface, at
//! T^E = T^A + α_acc(T^P − T^A). The two populations give separate Epstein
//! rates Γ^A and Γ^E, and the centre of mass sees a bath at the
//! rate-weighted temperature T_eff.
//!
//! T^P follows from the balance between optical absorption and cooling by
//! conduction and thermal radiation. Conduction only involves impinging
//! molecules, so the balance is solved first and T^E follows directly.

use std::f64::consts::PI;

use crate::constants::{BOLTZMANN, HBAR, STEFAN_BOLTZMANN, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::scenario::{GasEnvironment, Particle};

/// Upper end of the temperature bracket, in K. Silica sublimates well
/// below this.
pub const MAX_PARTICLE_TEMPERATURE: f64 = 5000.0;

/// Mean molecular speed V̄ = √(8k_BT/(πm)).
pub fn mean_molecular_speed(temperature: f64, molecule_mass: f64) -> f64 {
    (8.0 * BOLTZMANN * temperature / (PI * molecule_mass)).sqrt()
}

/// Epstein damping split by molecule population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DragState {
    /// Γ^A in rad/s.
    pub impinging: f64,
    /// Γ^E in rad/s.
    pub emerging: f64,
    /// Γ = Γ^A + Γ^E.
    pub total: f64,
    /// Bath temperature T_eff seen by the centre of mass, in K.
    pub effective_temperature: f64,
}

/// Drag rates for emerging molecules at `emerging_temperature`.
///
/// T_eff is a pressure-independent weighted mean, so it is well defined
/// even in vacuum where both rates vanish.
pub fn epstein_drag(p: &Particle, gas: &GasEnvironment, emerging_temperature: f64) -> DragState {
    let ta = gas.temperature;
    let v_a = mean_molecular_speed(ta, gas.molecule_mass);
    let v_e = mean_molecular_speed(emerging_temperature, gas.molecule_mass);
    let weight_a = 4.0 * PI / 3.0 * v_a;
    let weight_e = PI * PI / 6.0 * v_e;
    let scale = p.radius * p.radius * gas.density() / p.mass();
    let impinging = weight_a * scale;
    let emerging = weight_e * scale;
    DragState {
        impinging,
        emerging,
        total: impinging + emerging,
        effective_temperature: (weight_a * ta + weight_e * emerging_temperature) / (weight_a + weight_e),
    }
}

/// Mean thermal occupation [exp(ħ|ω|/k_BT) − 1]⁻¹ times ħ|ω|, which stays
/// finite at ω = 0.
fn occupation_energy(omega: f64, temperature: f64) -> f64 {
    let e = HBAR * omega.abs();
    if temperature <= 0.0 {
        return 0.0;
    }
    let kt = BOLTZMANN * temperature;
    if e == 0.0 {
        return kt;
    }
    e / (e / kt).exp_m1()
}

/// Thermal-force spectral density S_T(ω) = 2MΓħ|ω|[Θ(ω) + N_T(ω)] in N²s.
///
/// Positive ω is absorption by the bath (emission by the particle). The
/// convention is S(ω) = ∫⟨f(t)f(0)⟩e^{jωt}dt, so ∫S dω/2π is the force
/// variance.
pub fn thermal_force_psd(omega: f64, mass: f64, damping: f64, temperature: f64) -> f64 {
    let vacuum = if omega > 0.0 { HBAR * omega } else { 0.0 };
    2.0 * mass * damping * (vacuum + occupation_energy(omega, temperature))
}

/// Force spectral density when impinging and emerging molecules are at
/// different temperatures.
pub fn nonequilibrium_force_psd(
    omega: f64,
    mass: f64,
    drag: &DragState,
    ambient_temperature: f64,
    emerging_temperature: f64,
) -> f64 {
    thermal_force_psd(omega, mass, drag.impinging, ambient_temperature)
        + thermal_force_psd(omega, mass, drag.emerging, emerging_temperature)
}

/// Optical absorption P_H for an external field |E|² at angular frequency
/// `omega`. The internal field is reduced by 3/(ε_R + 2).
pub fn heating_rate(p: &Particle, field_square: f64, omega: f64) -> f64 {
    let internal = 9.0 * field_square / (p.eps_real + 2.0).powi(2);
    p.volume() * omega * VACUUM_PERMITTIVITY * p.eps_imag / 2.0 * internal
}

/// Conduction to the gas, P_C. Negative when the particle is colder than
/// the gas.
pub fn conductive_cooling_rate(p: &Particle, gas: &GasEnvironment, particle_temperature: f64) -> f64 {
    let gamma = gas.heat_capacity_ratio;
    let ta = gas.temperature;
    let flux = gas.pressure * mean_molecular_speed(ta, gas.molecule_mass) / (8.0 * ta);
    p.surface_area() * (gamma + 1.0) / (gamma - 1.0) * flux * p.accommodation * (particle_temperature - ta)
}

/// Net thermal radiation P_R.
pub fn radiative_cooling_rate(p: &Particle, particle_temperature: f64, ambient_temperature: f64) -> f64 {
    p.surface_area() * STEFAN_BOLTZMANN * p.emissivity * (particle_temperature.powi(4) - ambient_temperature.powi(4))
}

/// Solution of P_H = P_C + P_R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureBalance {
    /// T^P in K.
    pub particle: f64,
    /// T^E in K.
    pub emerging: f64,
    /// P_H in W.
    pub heating: f64,
    /// P_C in W.
    pub conduction: f64,
    /// P_R in W.
    pub radiation: f64,
    /// P_H − P_C − P_R at the reported T^P.
    pub residual: f64,
}

/// Surface temperature of a particle in a field |E|² at angular frequency
/// `omega`, by bisection on [T^A, 5000 K].
pub fn solve_particle_temperature(
    p: &Particle,
    gas: &GasEnvironment,
    field_square: f64,
    omega: f64,
) -> Result<TemperatureBalance> {
    let ta = gas.temperature;
    let heating = heating_rate(p, field_square, omega);
    let excess = |t: f64| heating - conductive_cooling_rate(p, gas, t) - radiative_cooling_rate(p, t, ta);

    let tp = if heating <= 0.0 {
        ta
    } else {
        if excess(MAX_PARTICLE_TEMPERATURE) > 0.0 {
            return Err(Error::NoRoot(format!(
                "absorbed power {heating:e} W exceeds cooling at {MAX_PARTICLE_TEMPERATURE} K"
            )));
        }
        let (mut lo, mut hi) = (ta, MAX_PARTICLE_TEMPERATURE);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if excess(lo).abs() <= excess(hi).abs() {
            lo
        } else {
            hi
        }
    };

    let conduction = conductive_cooling_rate(p, gas, tp);
    let radiation = radiative_cooling_rate(p, tp, ta);
    Ok(TemperatureBalance {
        particle: tp,
        emerging: ta + p.accommodation * (tp - ta),
        heating,
        conduction,
        radiation,
        residual: heating - conduction - radiation,
    })
}

/// Temperature balance and the drag it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub balance: TemperatureBalance,
    pub drag: DragState,
}

pub fn thermal_state(p: &Particle, gas: &GasEnvironment, field_square: f64, omega: f64) -> Result<ThermalState> {
    let balance = solve_particle_temperature(p, gas, field_square, omega)?;
    let drag = epstein_drag(p, gas, balance.emerging);
    Ok(ThermalState { balance, drag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PA_PER_MBAR;
    use proptest::prelude::*;

    fn sphere() -> Particle {
        Particle::fused_silica(170e-9, 1e-5, 0.8)
    }

    #[test]
    fn molecular_speed() {
        let v = mean_molecular_speed(293.0, 4.81e-26);
        assert!((v - 462.8).abs() < 0.5, "{v}");
        let ratio = mean_molecular_speed(4.0 * 293.0, 4.81e-26) / v;
        assert!((ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_drag() {
        let gas = GasEnvironment::air(0.1, 293.0);
        let d = epstein_drag(&sphere(), &gas, 293.0);
        assert!((d.emerging / d.impinging - PI / 8.0).abs() < 1e-14);
        assert!((d.effective_temperature - 293.0).abs() < 1e-12);
        let d2 = epstein_drag(&sphere(), &gas.with_pressure(0.2), 293.0);
        assert!((d2.total / d.total - 2.0).abs() < 1e-14);
        let vac = epstein_drag(&sphere(), &gas.with_pressure(0.0), 600.0);
        assert_eq!(vac.total, 0.0);
        assert!(vac.effective_temperature > 293.0 && vac.effective_temperature < 600.0);
    }

    #[test]
    fn force_psd_limits() {
        let (m, g) = (1e-17, 1e-3);
        let w = 1e6;
        assert_eq!(thermal_force_psd(-w, m, g, 0.0), 0.0);
        assert!((thermal_force_psd(w, m, g, 0.0) - 2.0 * m * g * HBAR * w).abs() < 1e-40);
        // k_B T = 300 K ≫ ħω
        let classical = 2.0 * m * g * BOLTZMANN * 300.0;
        for s in [thermal_force_psd(w, m, g, 300.0), thermal_force_psd(-w, m, g, 300.0)] {
            assert!((s / classical - 1.0).abs() < 0.01);
        }
        assert_eq!(thermal_force_psd(0.0, m, g, 300.0), classical);
    }

    #[test]
    fn nonequilibrium_reduces_to_equilibrium() {
        let gas = GasEnvironment::air(0.1, 293.0);
        let p = sphere();
        let d = epstein_drag(&p, &gas, 293.0);
        for i in -20..=20 {
            let w = i as f64 * 1e11;
            let a = thermal_force_psd(w, p.mass(), d.total, 293.0);
            let b = nonequilibrium_force_psd(w, p.mass(), &d, 293.0, 293.0);
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }

    #[test]
    fn loss_rates() {
        let p = sphere();
        let gas = GasEnvironment::air(100.0, 293.0);
        assert_eq!(heating_rate(&Particle { eps_imag: 0.0, ..p }, 1e12, 1e15), 0.0);
        assert_eq!(conductive_cooling_rate(&p, &gas, 293.0), 0.0);
        assert_eq!(conductive_cooling_rate(&Particle { accommodation: 0.0, ..p }, &gas, 900.0), 0.0);
        let double = conductive_cooling_rate(&p, &gas.with_pressure(200.0), 900.0);
        assert!((double / conductive_cooling_rate(&p, &gas, 900.0) - 2.0).abs() < 1e-14);
        let r = radiative_cooling_rate(&p, 586.0, 293.0);
        let expect = 15.0 * p.surface_area() * STEFAN_BOLTZMANN * 293f64.powi(4);
        assert!((r / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lossless_particle_stays_at_ambient() {
        let p = Particle { eps_imag: 0.0, ..sphere() };
        let gas = GasEnvironment::air(1e-5, 293.0);
        let b = solve_particle_temperature(&p, &gas, 1e13, 1.77e15).unwrap();
        assert_eq!(b.particle, 293.0);
        assert_eq!(b.emerging, 293.0);
    }

    #[test]
    fn overheating_has_no_root() {
        let gas = GasEnvironment::air(0.0, 293.0);
        let r = solve_particle_temperature(&sphere(), &gas, 1e18, 1.77e15);
        assert!(matches!(r, Err(Error::NoRoot(_))));
    }

    #[test]
    fn balance_residual_is_tight() {
        let gas = GasEnvironment::air(1e-3 * PA_PER_MBAR, 293.0);
        let b = solve_particle_temperature(&sphere(), &gas, 2e12, 1.77e15).unwrap();
        assert!(b.particle > 293.0);
        assert!(b.residual.abs() <= 1e-18f64.max(1e-9 * b.heating));
        assert!((b.emerging - (293.0 + 0.8 * (b.particle - 293.0))).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn particle_temperature_falls_with_pressure(
            log_p in -8.0f64..3.0,
            field in 1e11f64..5e12,
        ) {
            let p = sphere();
            let gas = GasEnvironment::air(10f64.powf(log_p), 293.0);
            let lo = solve_particle_temperature(&p, &gas, field, 1.77e15).unwrap();
            let hi = solve_particle_temperature(&p, &gas.with_pressure(gas.pressure * 3.0), field, 1.77e15).unwrap();
            prop_assert!(hi.particle <= lo.particle + 1e-9);
        }

        #[test]
        fn effective_temperature_is_bracketed(
            ta in 1.0f64..2000.0,
            te in 1.0f64..5000.0,
            pressure in 0.0f64..1e3,
        ) {
            let gas = GasEnvironment::air(pressure, ta);
            let d = epstein_drag(&sphere(), &gas, te);
            let (lo, hi) = (ta.min(te), ta.max(te));
            prop_assert!(d.effective_temperature >= lo * (1.0 - 1e-14));
            prop_assert!(d.effective_temperature <= hi * (1.0 + 1e-14));
            prop_assert!(d.impinging >= 0.0 && d.emerging >= 0.0);
        }
    }
}
