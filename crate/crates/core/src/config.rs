//! Scenario documents.
//!
//! A scenario is a JSON object. Every dimensioned key carries a unit
//! suffix, e.g. `"radius_nm": 170` or `"pressure_mbar": 1e-6`, and is
//! converted to SI on load. Accepted suffixes:
//!
//! | quantity        | suffixes                                  |
//! |-----------------|-------------------------------------------|
//! | length          | `m`, `mm`, `um`, `nm`                     |
//! | area            | `m2`, `um2`, `nm2`                        |
//! | pressure        | `pa`, `mbar`                              |
//! | temperature     | `k`                                       |
//! | mass            | `kg`, `u`                                 |
//! | mass density    | `kg_m3`                                   |
//! | angular rate    | `rad_s`, `hz`, `khz` (`hz`/`khz` mean κ/2π) |
//! | power           | `w`, `mw`                                 |
//!
//! The detector distance additionally accepts `distance_lambda`, a multiple
//! of the laser wavelength. A `comment` key is allowed in every object and
//! ignored. Any other unrecognised key is an error.
//!
//! Optional keys and their defaults: `particle.mass_density` (2200 kg/m³),
//! `particle.eps_real` (2.1), `particle.emissivity` (1),
//! `gas.molecule_mass` (air, 4.81e-26 kg), `gas.heat_capacity_ratio` (1.4),
//! `cavity.cool_linewidth` and `cavity.cool_wavelength` (levitating-field
//! values), `cavity.cool_power` (0), the per-axis `feedback_gains` (0), and
//! the detector offsets and area (near-optimal layout for the given
//! distance).

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::constants::{
    angular, AIR_HEAT_CAPACITY_RATIO, AIR_MOLECULE_MASS, ATOMIC_MASS_UNIT, FUSED_SILICA_DENSITY,
    FUSED_SILICA_EPS_REAL, PA_PER_MBAR,
};
use crate::error::{Error, Result};
use crate::scenario::{
    CavitySetup, DetectorLayout, FeedbackGains, GasEnvironment, LensSetup, Optics, Particle,
    Scenario,
};

const KIESEL: &str = include_str!("../scenarios/kiesel.json");
const GIESELER: &str = include_str!("../scenarios/gieseler.json");

/// Bundled scenario documents, by name.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".json") {
        "kiesel" => Some(KIESEL),
        "gieseler" => Some(GIESELER),
        _ => None,
    }
}

#[derive(Clone, Copy)]
enum Dim {
    Length,
    Area,
    Pressure,
    Temperature,
    Mass,
    Density,
    Rate,
    Power,
}

impl Dim {
    fn units(self) -> &'static [(&'static str, f64)] {
        use std::f64::consts::PI;
        match self {
            Dim::Length => &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9)],
            Dim::Area => &[("m2", 1.0), ("um2", 1e-12), ("nm2", 1e-18)],
            Dim::Pressure => &[("pa", 1.0), ("mbar", PA_PER_MBAR)],
            Dim::Temperature => &[("k", 1.0)],
            Dim::Mass => &[("kg", 1.0), ("u", ATOMIC_MASS_UNIT)],
            Dim::Density => &[("kg_m3", 1.0)],
            Dim::Rate => &[("rad_s", 1.0), ("hz", 2.0 * PI), ("khz", 2.0 * PI * 1e3)],
            Dim::Power => &[("w", 1.0), ("mw", 1e-3)],
        }
    }
}

struct Section<'a> {
    path: String,
    map: &'a Map<String, Value>,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(path: &str, value: &'a Value) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Parse(format!("`{path}` must be an object")))?;
        let mut used = BTreeSet::new();
        used.insert("comment".to_string());
        Ok(Section {
            path: path.to_string(),
            map,
            used,
        })
    }

    fn qualified(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => {
                self.used.insert(key.to_string());
                v.as_f64()
                    .map(Some)
                    .ok_or_else(|| Error::Parse(format!("`{}` must be a number", self.qualified(key))))
            }
        }
    }

    fn quantity(&mut self, base: &str, dim: Dim) -> Result<Option<f64>> {
        let mut found = None;
        for &(suffix, scale) in dim.units() {
            let key = format!("{base}_{suffix}");
            if let Some(v) = self.number(&key)? {
                if found.is_some() {
                    return Err(Error::Parse(format!(
                        "`{}` is given in more than one unit",
                        self.qualified(base)
                    )));
                }
                found = Some(v * scale);
            }
        }
        Ok(found)
    }

    fn required(&mut self, base: &str, dim: Dim) -> Result<f64> {
        if let Some(v) = self.quantity(base, dim)? {
            return Ok(v);
        }
        // a misspelt key with the right unit suffix is the likelier mistake
        let misspelt = self.map.keys().find(|k| {
            !self.used.contains(*k) && dim.units().iter().any(|(suffix, _)| k.ends_with(&format!("_{suffix}")))
        });
        match misspelt {
            Some(k) => Err(Error::UnknownKey(self.qualified(k))),
            None => Err(Error::MissingKey(self.qualified(base))),
        }
    }

    fn required_number(&mut self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| Error::MissingKey(self.qualified(key)))
    }

    fn finish(self) -> Result<()> {
        for key in self.map.keys() {
            if !self.used.contains(key) {
                return Err(Error::UnknownKey(self.qualified(key)));
            }
        }
        Ok(())
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut top = Section::new("", &root)?;

    let name = match top.map.get("name") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(Error::Parse("`name` must be a string".into())),
    };
    top.used.insert("name".into());

    let particle = parse_particle(child(&mut top, "particle")?.ok_or(Error::MissingKey("particle".into()))?)?;
    let gas = parse_gas(child(&mut top, "gas")?.ok_or(Error::MissingKey("gas".into()))?)?;

    let cavity = child(&mut top, "cavity")?;
    let lens = child(&mut top, "lens")?;
    let optics = match (cavity, lens) {
        (Some(c), None) => Optics::Cavity(parse_cavity(c)?),
        (None, Some(l)) => Optics::Lens(parse_lens(l)?),
        (Some(_), Some(_)) => {
            return Err(Error::Parse("give either `cavity` or `lens`, not both".into()))
        }
        (None, None) => return Err(Error::MissingKey("cavity | lens".into())),
    };

    let feedback_gains = child(&mut top, "feedback_gains")?
        .map(parse_gains)
        .transpose()?;
    let detector = match child(&mut top, "detector")? {
        None => None,
        Some(v) => Some(parse_detector(v, optics.wavelength())?),
    };
    top.finish()?;

    let scenario = Scenario {
        name,
        particle,
        gas,
        optics,
        feedback_gains,
        detector,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Reads a scenario from a file, falling back to a bundled scenario when
/// the path does not exist but names one (`kiesel`, `gieseler.json`, ...).
pub fn load_scenario_file(path: &Path) -> Result<Scenario> {
    match std::fs::read_to_string(path) {
        Ok(text) => load_scenario(&text),
        Err(e) => {
            let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
            match bundled(name) {
                Some(text) if !path.exists() => load_scenario(text),
                _ => Err(Error::Parse(format!("{}: {e}", path.display()))),
            }
        }
    }
}

fn child<'a>(section: &mut Section<'a>, key: &str) -> Result<Option<Section<'a>>> {
    match section.map.get(key) {
        None => Ok(None),
        Some(v) => {
            section.used.insert(key.to_string());
            Section::new(&section.qualified(key), v).map(Some)
        }
    }
}

fn parse_particle(mut s: Section) -> Result<Particle> {
    let p = Particle {
        radius: s.required("radius", Dim::Length)?,
        mass_density: s
            .quantity("mass_density", Dim::Density)?
            .unwrap_or(FUSED_SILICA_DENSITY),
        eps_real: s.number("eps_real")?.unwrap_or(FUSED_SILICA_EPS_REAL),
        eps_imag: s.required_number("eps_imag")?,
        accommodation: s.required_number("accommodation")?,
        emissivity: s.number("emissivity")?.unwrap_or(1.0),
    };
    s.finish()?;
    Ok(p)
}

fn parse_gas(mut s: Section) -> Result<GasEnvironment> {
    let g = GasEnvironment {
        pressure: s.required("pressure", Dim::Pressure)?,
        temperature: s.required("temperature", Dim::Temperature)?,
        molecule_mass: s
            .quantity("molecule_mass", Dim::Mass)?
            .unwrap_or(AIR_MOLECULE_MASS),
        heat_capacity_ratio: s
            .number("heat_capacity_ratio")?
            .unwrap_or(AIR_HEAT_CAPACITY_RATIO),
    };
    s.finish()?;
    Ok(g)
}

fn parse_cavity(mut s: Section) -> Result<CavitySetup> {
    let wavelength = s.required("wavelength", Dim::Length)?;
    let lev_linewidth = s.required("lev_linewidth", Dim::Rate)?;
    let c = CavitySetup {
        length: s.required("length", Dim::Length)?,
        wavelength,
        levitation_offset: s.required("levitation_offset", Dim::Length)?,
        lev_linewidth,
        lev_power: s.required("lev_power", Dim::Power)?,
        cool_linewidth: s
            .quantity("cool_linewidth", Dim::Rate)?
            .unwrap_or(lev_linewidth),
        cool_power: s.quantity("cool_power", Dim::Power)?.unwrap_or(0.0),
        cool_wavelength: s
            .quantity("cool_wavelength", Dim::Length)?
            .unwrap_or(wavelength),
    };
    s.finish()?;
    Ok(c)
}

fn parse_lens(mut s: Section) -> Result<LensSetup> {
    let l = LensSetup {
        numerical_aperture: s.required_number("numerical_aperture")?,
        wavelength: s.required("wavelength", Dim::Length)?,
        laser_power: s.required("laser_power", Dim::Power)?,
    };
    s.finish()?;
    Ok(l)
}

fn parse_gains(mut s: Section) -> Result<FeedbackGains> {
    let g = FeedbackGains {
        x: s.quantity("x", Dim::Rate)?.unwrap_or(0.0),
        y: s.quantity("y", Dim::Rate)?.unwrap_or(0.0),
        z: s.quantity("z", Dim::Rate)?.unwrap_or(0.0),
    };
    s.finish()?;
    Ok(g)
}

fn parse_detector(mut s: Section, wavelength: f64) -> Result<DetectorLayout> {
    let in_lambda = s.number("distance_lambda")?.map(|n| n * wavelength);
    let absolute = s.quantity("distance", Dim::Length)?;
    let distance = match (in_lambda, absolute) {
        (Some(d), None) | (None, Some(d)) => d,
        (Some(_), Some(_)) => {
            return Err(Error::Parse("`detector.distance` is given in more than one unit".into()))
        }
        (None, None) => return Err(Error::MissingKey("detector.distance".into())),
    };
    let offset_x = s.quantity("offset_x", Dim::Length)?;
    let offset_y = s.quantity("offset_y", Dim::Length)?;
    let area = s.quantity("area", Dim::Area)?;
    s.finish()?;

    let mut layout = DetectorLayout::near_optimal(wavelength, distance)?;
    if let Some(x) = offset_x {
        layout.offset_x = x;
    }
    if let Some(y) = offset_y {
        layout.offset_y = y;
    }
    if let Some(a) = area {
        layout.area = a;
    }
    Ok(layout)
}

/// Serializes a scenario with SI-suffixed keys. Loading the result gives
/// back a bit-identical scenario.
pub fn scenario_to_json(s: &Scenario) -> String {
    let p = &s.particle;
    let g = &s.gas;
    let mut root = Map::new();
    if let Some(name) = &s.name {
        root.insert("name".into(), json!(name));
    }
    root.insert(
        "particle".into(),
        json!({
            "radius_m": p.radius,
            "mass_density_kg_m3": p.mass_density,
            "eps_real": p.eps_real,
            "eps_imag": p.eps_imag,
            "accommodation": p.accommodation,
            "emissivity": p.emissivity,
        }),
    );
    root.insert(
        "gas".into(),
        json!({
            "pressure_pa": g.pressure,
            "temperature_k": g.temperature,
            "molecule_mass_kg": g.molecule_mass,
            "heat_capacity_ratio": g.heat_capacity_ratio,
        }),
    );
    match &s.optics {
        Optics::Cavity(c) => {
            root.insert(
                "cavity".into(),
                json!({
                    "length_m": c.length,
                    "wavelength_m": c.wavelength,
                    "levitation_offset_m": c.levitation_offset,
                    "lev_linewidth_rad_s": c.lev_linewidth,
                    "lev_power_w": c.lev_power,
                    "cool_linewidth_rad_s": c.cool_linewidth,
                    "cool_power_w": c.cool_power,
                    "cool_wavelength_m": c.cool_wavelength,
                }),
            );
        }
        Optics::Lens(l) => {
            root.insert(
                "lens".into(),
                json!({
                    "numerical_aperture": l.numerical_aperture,
                    "wavelength_m": l.wavelength,
                    "laser_power_w": l.laser_power,
                }),
            );
        }
    }
    if let Some(f) = &s.feedback_gains {
        root.insert(
            "feedback_gains".into(),
            json!({ "x_rad_s": f.x, "y_rad_s": f.y, "z_rad_s": f.z }),
        );
    }
    if let Some(d) = &s.detector {
        root.insert(
            "detector".into(),
            json!({
                "distance_m": d.distance,
                "offset_x_m": d.offset_x,
                "offset_y_m": d.offset_y,
                "area_m2": d.area,
            }),
        );
    }
    serde_json::to_string_pretty(&Value::Object(root)).expect("scenario values are finite")
}

/// Convenience for CLI pressure sweeps given in mbar.
pub fn mbar(p: f64) -> f64 {
    p * PA_PER_MBAR
}

/// Linewidths and gains quoted as κ/2π in kHz.
pub fn khz(f: f64) -> f64 {
    angular(f * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_LENS: &str = r#"{
        "particle": { "radius_nm": 70, "eps_imag": 1e-5, "accommodation": 0.8 },
        "gas": { "pressure_mbar": 1e-6, "temperature_k": 293 },
        "lens": { "numerical_aperture": 0.8, "wavelength_nm": 1064, "laser_power_mw": 100 }
    }"#;

    #[test]
    fn bundled_scenarios_load() {
        let k = load_scenario(bundled("kiesel").unwrap()).unwrap();
        let c = k.cavity().unwrap();
        assert!((c.length - 11e-3).abs() < 1e-15);
        assert!((k.particle.radius - 170e-9).abs() < 1e-20);
        assert!((c.lev_linewidth - angular(180e3)).abs() < 1e-6);
        let g = load_scenario(bundled("gieseler.json").unwrap()).unwrap();
        let l = g.lens().unwrap();
        assert_eq!(l.numerical_aperture, 0.8);
        assert!((l.laser_power - 0.1).abs() < 1e-15);
    }

    #[test]
    fn defaults_apply_to_optional_keys() {
        let s = load_scenario(MINIMAL_LENS).unwrap();
        assert_eq!(s.particle.mass_density, 2200.0);
        assert_eq!(s.particle.eps_real, 2.1);
        assert_eq!(s.gas.molecule_mass, AIR_MOLECULE_MASS);
        assert!(s.detector.is_none());
    }

    #[test]
    fn mbar_and_pa_load_identically() {
        let a = load_scenario(MINIMAL_LENS.replace("\"pressure_mbar\": 1e-6", "\"pressure_mbar\": 1").as_str()).unwrap();
        let b = load_scenario(MINIMAL_LENS.replace("\"pressure_mbar\": 1e-6", "\"pressure_pa\": 100").as_str()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn accommodation_out_of_range_names_field() {
        let doc = MINIMAL_LENS.replace("\"accommodation\": 0.8", "\"accommodation\": 1.5");
        match load_scenario(&doc) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "particle.accommodation"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn typo_is_rejected() {
        let doc = MINIMAL_LENS.replace("radius_nm", "raduis_nm");
        assert!(matches!(load_scenario(&doc), Err(Error::UnknownKey(k)) if k == "particle.raduis_nm"));
    }

    #[test]
    fn missing_and_malformed() {
        let doc = MINIMAL_LENS.replace("\"eps_imag\": 1e-5,", "");
        assert!(matches!(load_scenario(&doc), Err(Error::MissingKey(k)) if k == "particle.eps_imag"));
        assert!(matches!(load_scenario("{ not json"), Err(Error::Parse(_))));
        let doc = MINIMAL_LENS.replace("\"radius_nm\": 70", "\"radius_nm\": 70, \"radius_m\": 7e-8");
        assert!(matches!(load_scenario(&doc), Err(Error::Parse(_))));
    }

    #[test]
    fn feedback_only_with_lens() {
        let k = bundled("kiesel").unwrap();
        let mut v: Value = serde_json::from_str(k).unwrap();
        v["feedback_gains"] = json!({ "z_hz": 300 });
        assert!(matches!(
            load_scenario(&v.to_string()),
            Err(Error::Validation { field, .. }) if field == "feedback_gains"
        ));
    }

    #[test]
    fn detector_defaults_to_near_optimal_layout() {
        let doc = MINIMAL_LENS.replace(
            "\"lens\"",
            "\"detector\": { \"distance_lambda\": 20 }, \"lens\"",
        );
        let s = load_scenario(&doc).unwrap();
        let d = s.detector.unwrap();
        assert!((d.distance - 20.0 * 1064e-9).abs() < 1e-18);
        assert_eq!(d.offset_x, d.offset_y);
        assert!((d.area - d.offset_x * d.offset_x).abs() < 1e-30);
        let bad = MINIMAL_LENS.replace(
            "\"lens\"",
            "\"detector\": { \"distance_lambda\": 10 }, \"lens\"",
        );
        assert!(load_scenario(&bad).is_err());
    }

    #[test]
    fn round_trip_is_exact_for_bundled() {
        for name in ["kiesel", "gieseler"] {
            let s = load_scenario(bundled(name).unwrap()).unwrap();
            let again = load_scenario(&scenario_to_json(&s)).unwrap();
            assert_eq!(s, again);
        }
    }
}
