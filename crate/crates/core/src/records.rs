//! Flat, unit-suffixed records of the library's result types, shared by
//! the command line and the C interface.

use crate::cavity::{CavityBudget, CavitySystem, EscapeAssessment};
use crate::emit::{Record, Value};
use crate::error::Result;
use crate::feedback::{FeedbackBudget, FeedbackSystem, GainOptimum};
use crate::optics::{lens_coefficients, Axis, CavityCoefficients, LensCoefficients};
use crate::scenario::{Optics, Scenario};
use crate::thermo::ThermalState;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Particle temperature and drag of a scenario.
pub fn scenario_thermal(scenario: &Scenario) -> Result<ThermalState> {
    Ok(match scenario.optics {
        Optics::Cavity(_) => CavitySystem::new(scenario)?.thermal,
        Optics::Lens(_) => FeedbackSystem::new(scenario)?.thermal,
    })
}

pub fn temperature_record(t: &ThermalState) -> Record {
    Record::new()
        .num("particle_temperature_k", t.balance.particle)
        .num("emerging_temperature_k", t.balance.emerging)
        .num("effective_temperature_k", t.drag.effective_temperature)
        .num("damping_impinging_rad_s", t.drag.impinging)
        .num("damping_emerging_rad_s", t.drag.emerging)
        .num("damping_rad_s", t.drag.total)
        .num("heating_w", t.balance.heating)
        .num("conduction_w", t.balance.conduction)
        .num("radiation_w", t.balance.radiation)
        .num("residual_w", t.balance.residual)
}

pub fn cavity_coefficients_record(c: &CavityCoefficients) -> Record {
    Record::new()
        .num("gradient_z_n_per_m_w", c.gradient_z)
        .num("gradient_x_n_per_m_w", c.gradient_x)
        .num("gradient_y_n_per_m_w", c.gradient_y)
        .num("pull_slope_max_rad_s_m", c.pull_slope_max)
        .num("pull_curvature_rad_s_m2", c.pull_curvature())
}

pub fn lens_coefficients_record(c: &LensCoefficients) -> Record {
    Record::new()
        .num("gradient_z_n_per_m_w", c.gradient_z)
        .num("gradient_x_n_per_m_w", c.gradient_x)
        .num("gradient_y_n_per_m_w", c.gradient_y)
        .num("radiation_pressure_z_n_per_w", c.radiation_pressure_z)
}

pub fn coefficients_record(scenario: &Scenario) -> Result<Record> {
    Ok(match &scenario.optics {
        Optics::Cavity(_) => {
            let sys = CavitySystem::new(scenario)?;
            cavity_coefficients_record(&sys.coefficients)
                .num("trap_frequency_rad_s", sys.trap_frequency)
                .num("trap_frequency_hz", sys.trap_frequency / TWO_PI)
                .num("mass_kg", sys.mass)
        }
        Optics::Lens(lens) => {
            let sys = FeedbackSystem::new(scenario)?;
            let mut r = lens_coefficients_record(&lens_coefficients(&scenario.particle, lens));
            for axis in Axis::ALL {
                let w = sys.frequencies.get(axis);
                r = r
                    .num(&format!("{}_frequency_rad_s", axis.name()), w)
                    .num(&format!("{}_frequency_hz", axis.name()), w / TWO_PI);
            }
            r.num("mass_kg", sys.mass)
        }
    })
}

/// A cavity budget. Occupations with no stationary value are written as
/// "diverges"; the perturbative n̄_G,Z is always given separately.
pub fn cavity_budget_record(b: &CavityBudget, escape: &EscapeAssessment) -> Record {
    let unbounded = b.diagnostics.noise_dominated;
    let guard = |x: f64| if unbounded { Value::Diverges } else { Value::bounded(x) };
    Record::new()
        .num("trap_frequency_rad_s", b.trap_frequency)
        .num("damping_rad_s", b.damping)
        .num("optomechanical_damping_rad_s", b.optomechanical_damping)
        .num("particle_temperature_k", b.particle_temperature)
        .num("effective_temperature_k", b.effective_temperature)
        .num("thermal_phonons", b.thermal_phonons)
        .value("levitation_phonons", guard(b.levitation_phonons))
        .num("levitation_phonons_perturbative", b.levitation_phonons)
        .num("backaction_floor", b.backaction_floor)
        .value("phonons", guard(b.phonons))
        .num("rms_thermal_m", b.rms_thermal)
        .value("rms_levitation_m", guard(b.rms_levitation))
        .value("rms_total_m", guard(b.rms_total))
        .num("lev_photons", b.lev_photons)
        .num("cool_photons", b.cool_photons)
        .num("linewidth_ratio", b.diagnostics.linewidth_ratio)
        .value("damping_ratio", Value::bounded(b.diagnostics.damping_ratio))
        .num("parametric_rate_rad_s", b.diagnostics.parametric_rate)
        .flag("noise_dominated", unbounded)
        .flag("escaped", escape.escaped)
        .num("escape_margin", escape.margin)
        .num("escape_threshold_m", escape.threshold)
}

pub fn feedback_budget_record(b: &FeedbackBudget) -> Record {
    let mut r = Record::new();
    for axis in Axis::ALL {
        let a = b.axes.get(axis);
        let n = axis.name();
        r = r
            .num(&format!("{n}_frequency_rad_s"), a.frequency)
            .num(&format!("{n}_gain_rad_s"), a.gain)
            .num(&format!("{n}_thermal_phonons"), a.thermal)
            .num(&format!("{n}_gradient_phonons"), a.gradient)
            .num(&format!("{n}_radiation_pressure_phonons"), a.radiation_pressure)
            .num(&format!("{n}_suppression"), a.suppression)
            .num(&format!("{n}_ideal_phonons"), a.ideal)
            .num(&format!("{n}_shot_phonons"), a.shot)
            .value(&format!("{n}_phonons"), Value::bounded(a.total))
            .value(&format!("{n}_rms_m"), Value::bounded(a.rms))
            .num(&format!("{n}_rms_quantum_m"), a.rms_quantum)
            .num(&format!("{n}_modulation_index"), a.modulation_index);
    }
    r.num("shift_radiation_pressure_z_m", b.shifts.radiation_pressure_z)
        .num("shift_gravity_y_m", b.shifts.gravity_y)
        .num("detector_power_w", b.detector_power)
        .num("damping_rad_s", b.damping)
        .num("particle_temperature_k", b.particle_temperature)
        .num("effective_temperature_k", b.effective_temperature)
}

pub fn optimum_record(pressure_mbar: f64, o: &GainOptimum) -> Record {
    Record::new()
        .num("pressure_mbar", pressure_mbar)
        .num("gain_rad_s", o.gain)
        .num("n_total", o.phonons)
        .num("rms_m", o.rms)
        .num("mod_index", o.modulation_index)
}
