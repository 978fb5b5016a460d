use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use levopt_ffi::*;

fn bundled(name: &str) -> *mut LevoptScenario {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { levopt_scenario_bundled(name.as_ptr(), &mut h) }, LevoptStatus::Ok);
    assert!(!h.is_null());
    h
}

fn take(s: *mut c_char) -> serde_json::Value {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { levopt_string_free(s) };
    serde_json::from_str(&text).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(levopt_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn cavity_budget_round_trip() {
    let h = bundled("kiesel");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { levopt_cavity_budget(h, &mut out) }, LevoptStatus::Ok);
    let v = take(out);
    let w = v["trap_frequency_rad_s"].as_f64().unwrap();
    assert!((w / (2.0 * std::f64::consts::PI) / 203e3 - 1.0).abs() < 0.05);

    let mut low = ptr::null_mut();
    assert_eq!(unsafe { levopt_scenario_with_pressure_pa(h, levopt_mbar_to_pa(1e-10), &mut low) }, LevoptStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { levopt_cavity_budget(low, &mut out) }, LevoptStatus::Ok);
    let v = take(out);
    assert_eq!(v["escaped"], true);
    unsafe {
        levopt_scenario_free(low);
        levopt_scenario_free(h);
    }
}

#[test]
fn json_round_trip_and_temperature() {
    let h = bundled("gieseler");
    let mut doc = ptr::null_mut();
    assert_eq!(unsafe { levopt_scenario_to_json(h, &mut doc) }, LevoptStatus::Ok);
    let text = unsafe { CStr::from_ptr(doc) }.to_owned();
    unsafe { levopt_string_free(doc) };
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { levopt_scenario_from_json(text.as_ptr(), &mut copy) }, LevoptStatus::Ok);

    let temps: Vec<f64> = [h, copy]
        .iter()
        .map(|&s| {
            let mut out = ptr::null_mut();
            assert_eq!(unsafe { levopt_temperature(s, &mut out) }, LevoptStatus::Ok);
            take(out)["particle_temperature_k"].as_f64().unwrap()
        })
        .collect();
    assert_eq!(temps[0], temps[1]);
    unsafe {
        levopt_scenario_free(copy);
        levopt_scenario_free(h);
    }
}

#[test]
fn feedback_and_optimum() {
    let h = bundled("gieseler");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { levopt_feedback_budget(h, &mut out) }, LevoptStatus::Ok);
    assert!(take(out)["z_phonons"].as_f64().unwrap() > 0.0);
    let (mut g, mut n, mut rms) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { levopt_optimize_gain(h, LevoptAxis::Z, &mut g, &mut n, &mut rms) }, LevoptStatus::Ok);
    assert!(g > 0.0 && n > 0.0 && rms > 0.0);
    unsafe { levopt_scenario_free(h) };
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("{\"particle\": {}}").unwrap();
    let mut h = ptr::null_mut();
    let status = unsafe { levopt_scenario_from_json(bad.as_ptr(), &mut h) };
    assert_ne!(status, LevoptStatus::Ok);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { levopt_cavity_budget(ptr::null(), &mut out) }, LevoptStatus::NullPointer);

    let h = bundled("kiesel");
    assert_eq!(unsafe { levopt_feedback_budget(h, &mut out) }, LevoptStatus::WrongOptics);
    let mut w = 0.0;
    assert_eq!(unsafe { levopt_required_cooling_power(h, 1e-9, &mut w) }, LevoptStatus::Infeasible);
    unsafe { levopt_scenario_free(h) };

    let mut f = 0.0;
    assert_eq!(unsafe { levopt_thermal_sensitivity(1.0, 0.01, &mut f) }, LevoptStatus::Ok);
    assert_eq!(f, 1e4);
    assert_eq!(last_error(), "");
    assert_eq!(unsafe { levopt_thermal_sensitivity(1.0, 0.0, &mut f) }, LevoptStatus::Validation);
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(levopt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
