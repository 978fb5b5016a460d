//! C interface to `levopt`.
//!
//! Scenarios are opaque handles created by `levopt_scenario_from_json` or
//! `levopt_scenario_bundled` and released with `levopt_scenario_free`.
//! Every function returns a `LevoptStatus`; on failure the message is
//! available from `levopt_last_error` on the same thread. Strings handed
//! out by the library are freed with `levopt_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use levopt::cavity::CavitySystem;
use levopt::config::{bundled, load_scenario, mbar, scenario_to_json};
use levopt::emit::{emit, Format, Record};
use levopt::error::Error;
use levopt::feedback::{thermal_sensitivity, FeedbackSystem};
use levopt::optics::Axis;
use levopt::records;
use levopt::scenario::Scenario;

/// Opaque scenario handle.
pub struct LevoptScenario(Scenario);

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevoptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    WrongOptics = 5,
    Infeasible = 6,
    Numerical = 7,
    Serialization = 8,
    Panic = 9,
}

/// Cartesian axis for `levopt_optimize_gain`.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevoptAxis {
    X = 0,
    Y = 1,
    Z = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LevoptStatus {
    match e {
        Error::Parse(_) | Error::UnknownKey(_) | Error::MissingKey(_) => LevoptStatus::Parse,
        Error::Validation { .. } | Error::Validity(_) => LevoptStatus::Validation,
        Error::WrongOptics(_) => LevoptStatus::WrongOptics,
        Error::Infeasible(_) => LevoptStatus::Infeasible,
        Error::Serialization(_) => LevoptStatus::Serialization,
        _ => LevoptStatus::Numerical,
    }
}

enum Failure {
    Status(LevoptStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs `f`, converting errors and panics to a status.
fn guard(f: impl FnOnce() -> Outcome) -> LevoptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LevoptStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            LevoptStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(LevoptStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> std::result::Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(LevoptStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn scenario_ref<'a>(p: *const LevoptScenario) -> std::result::Result<&'a Scenario, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("scenario"))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Outcome {
    let c = CString::new(s).map_err(|_| Failure::Status(LevoptStatus::Serialization, "interior NUL".into()))?;
    put(out, c.into_raw(), "out")
}

unsafe fn put_record(out: *mut *mut c_char, r: Record) -> Outcome {
    let text = emit(&[r], Format::Json)?;
    put_string(out, text)
}

unsafe fn put_handle(out: *mut *mut LevoptScenario, s: Scenario) -> Outcome {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(LevoptScenario(s))));
    Ok(())
}

/// Parses a scenario JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_scenario_from_json(json: *const c_char, out: *mut *mut LevoptScenario) -> LevoptStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        put_handle(out, load_scenario(text)?)
    })
}

/// Loads a bundled scenario by name (`kiesel` or `gieseler`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_scenario_bundled(name: *const c_char, out: *mut *mut LevoptScenario) -> LevoptStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let text = bundled(name).ok_or_else(|| Error::Parse(format!("no bundled scenario `{name}`")))?;
        put_handle(out, load_scenario(text)?)
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn levopt_scenario_free(scenario: *mut LevoptScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// A copy of `scenario` at another pressure, given in Pa.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_scenario_with_pressure_pa(
    scenario: *const LevoptScenario,
    pressure_pa: f64,
    out: *mut *mut LevoptScenario,
) -> LevoptStatus {
    guard(|| {
        let s = scenario_ref(scenario)?.with_pressure(pressure_pa);
        s.validate()?;
        put_handle(out, s)
    })
}

/// The scenario as a JSON document.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_scenario_to_json(scenario: *const LevoptScenario, out: *mut *mut c_char) -> LevoptStatus {
    guard(|| {
        let s = scenario_ref(scenario)?;
        put_string(out, scenario_to_json(s))
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn levopt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Particle temperature, drag and power balance as a JSON object.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_temperature(scenario: *const LevoptScenario, out: *mut *mut c_char) -> LevoptStatus {
    guard(|| {
        let t = records::scenario_thermal(scenario_ref(scenario)?)?;
        put_record(out, records::temperature_record(&t))
    })
}

/// Cavity phonon budget as a JSON object. Unbounded occupations are
/// given as the string "diverges".
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_cavity_budget(scenario: *const LevoptScenario, out: *mut *mut c_char) -> LevoptStatus {
    guard(|| {
        let sys = CavitySystem::new(scenario_ref(scenario)?)?;
        let b = sys.budget();
        let escape = levopt::cavity::escape_assessment(&b, sys.setup.wavelength);
        put_record(out, records::cavity_budget_record(&b, &escape))
    })
}

/// Cooling power in W that brings the cavity occupation to `target`.
///
/// # Safety
/// `scenario` must be a live handle; `watts` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_required_cooling_power(
    scenario: *const LevoptScenario,
    target: f64,
    watts: *mut f64,
) -> LevoptStatus {
    guard(|| {
        let w = CavitySystem::new(scenario_ref(scenario)?)?.required_cooling_power(target)?;
        put(watts, w, "watts")
    })
}

/// Feedback phonon budget at the scenario's gains as a JSON object.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_feedback_budget(scenario: *const LevoptScenario, out: *mut *mut c_char) -> LevoptStatus {
    guard(|| {
        let b = FeedbackSystem::new(scenario_ref(scenario)?)?.budget();
        put_record(out, records::feedback_budget_record(&b))
    })
}

/// Feedback gain minimising the phonon number along `axis`.
///
/// # Safety
/// `scenario` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_optimize_gain(
    scenario: *const LevoptScenario,
    axis: LevoptAxis,
    gain_rad_s: *mut f64,
    phonons: *mut f64,
    rms_m: *mut f64,
) -> LevoptStatus {
    guard(|| {
        let axis = match axis {
            LevoptAxis::X => Axis::X,
            LevoptAxis::Y => Axis::Y,
            LevoptAxis::Z => Axis::Z,
        };
        let o = FeedbackSystem::new(scenario_ref(scenario)?)?.optimize_gain(axis)?;
        if gain_rad_s.is_null() || phonons.is_null() || rms_m.is_null() {
            return Err(null("output"));
        }
        gain_rad_s.write(o.gain);
        phonons.write(o.phonons);
        rms_m.write(o.rms);
        Ok(())
    })
}

/// Growth in feedback-noise sensitivity, (index_ref/index)².
///
/// # Safety
/// `factor` must be writable.
#[no_mangle]
pub unsafe extern "C" fn levopt_thermal_sensitivity(index_ref: f64, index: f64, factor: *mut f64) -> LevoptStatus {
    guard(|| put(factor, thermal_sensitivity(index_ref, index)?, "factor"))
}

/// Message of the last failure on this thread, empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn levopt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn levopt_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Pressure conversion helper for callers working in mbar.
#[no_mangle]
pub extern "C" fn levopt_mbar_to_pa(pressure_mbar: f64) -> f64 {
    mbar(pressure_mbar)
}
