use levopt::config::{bundled, load_scenario, mbar};
use levopt::feedback::FeedbackSystem;
use levopt::langevin::{
    cold_damping_oscillator, simulate_oscillator, simulate_parametric, thermal_oscillator, DriveMode, Oscillator,
    Scheme, SimConfig,
};
use levopt::optics::Axis;
use levopt::scenario::Scenario;

fn scenario(name: &str, pressure_mbar: f64) -> Scenario {
    load_scenario(bundled(name).unwrap()).unwrap().with_pressure(mbar(pressure_mbar))
}

fn exact(osc: &Oscillator, ensemble: usize, seed: u64) -> SimConfig {
    SimConfig {
        dt: 0.1 / osc.damping,
        duration: 200.0 / osc.damping,
        seed,
        ensemble,
        scheme: Scheme::ExactOU,
        record: false,
    }
}

#[test]
fn schemes_agree_at_high_pressure() {
    let osc = thermal_oscillator(&scenario("kiesel", 100.0)).unwrap();
    let semi = SimConfig {
        dt: 0.01 / osc.frequency.max(osc.damping),
        duration: 200.0 / osc.damping,
        seed: 5,
        ensemble: 32,
        scheme: Scheme::SemiImplicit,
        record: false,
    };
    let a = simulate_oscillator(&osc, &semi).unwrap();
    let b = simulate_oscillator(&osc, &exact(&osc, 32, 6)).unwrap();
    let se = a.variance.standard_error.hypot(b.variance.standard_error);
    assert!((a.variance.mean - b.variance.mean).abs() < 3.0 * se, "{a:?} {b:?}");
    assert!(a.variance.deviation(osc.stationary_variance()).abs() < 3.0);
}

#[test]
fn standard_error_shrinks_with_ensemble() {
    let osc = thermal_oscillator(&scenario("kiesel", 1e-3)).unwrap();
    let small = simulate_oscillator(&osc, &exact(&osc, 64, 1)).unwrap();
    let large = simulate_oscillator(&osc, &exact(&osc, 256, 1)).unwrap();
    let ratio = small.variance.standard_error / large.variance.standard_error;
    assert!((ratio / 2.0 - 1.0).abs() < 0.35, "ratio {ratio}");
}

#[test]
fn cold_damping_at_matched_gain_halves_variance() {
    let sys = FeedbackSystem::new(&scenario("gieseler", 1e-3)).unwrap();
    let gamma = sys.damping();
    let free = cold_damping_oscillator(&sys, Axis::Z, 0.0, false);
    let damped = cold_damping_oscillator(&sys, Axis::Z, gamma, false);
    assert!((damped.stationary_variance() / free.stationary_variance() - 0.5).abs() < 1e-12);
    let r = simulate_oscillator(&damped, &exact(&damped, 128, 4)).unwrap();
    assert!(r.variance.deviation(0.5 * free.stationary_variance()).abs() < 3.0, "{r:?}");
}

#[test]
fn zero_gain_is_the_thermal_oscillator() {
    let sys = FeedbackSystem::new(&scenario("gieseler", 1e-3)).unwrap();
    let osc = cold_damping_oscillator(&sys, Axis::Z, 0.0, true);
    let thermal = Oscillator::thermal(sys.mass, sys.frequencies.z, sys.damping(), sys.thermal.drag.effective_temperature);
    assert_eq!(osc.damping, thermal.damping);
    assert!((osc.stationary_variance() / thermal.stationary_variance() - 1.0).abs() < 1e-6);
    let a = simulate_oscillator(&osc, &exact(&osc, 64, 3)).unwrap();
    assert!(a.variance.deviation(thermal.stationary_variance()).abs() < 3.0);
}

#[test]
fn no_power_noise_no_levitation_motion() {
    let s = scenario("kiesel", 1e-3);
    let w = levopt::cavity::CavitySystem::new(&s).unwrap().trap_frequency;
    let cfg = SimConfig {
        dt: 0.01 / w,
        duration: 50.0 / w,
        seed: 2,
        ensemble: 16,
        scheme: Scheme::ExactOU,
        record: false,
    };
    for mode in [DriveMode::Joint, DriveMode::Pregenerated] {
        let r = simulate_parametric(&s, &cfg, mode, 0.0).unwrap();
        assert_eq!(r.variance.mean, 0.0);
        assert_eq!(r.cross.mean, 0.0);
    }
}

#[test]
fn same_seed_same_numbers() {
    let osc = thermal_oscillator(&scenario("kiesel", 1e-3)).unwrap();
    let a = simulate_oscillator(&osc, &exact(&osc, 32, 11)).unwrap();
    let b = simulate_oscillator(&osc, &exact(&osc, 32, 11)).unwrap();
    let c = simulate_oscillator(&osc, &exact(&osc, 32, 12)).unwrap();
    assert_eq!(a.variance, b.variance);
    assert_ne!(a.variance, c.variance);
}
