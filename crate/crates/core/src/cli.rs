//! The `levopt` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::cavity::{escape_assessment, CavitySystem};
use crate::config::{bundled, load_scenario, load_scenario_file, mbar};
use crate::emit::{emit, Format, Record, Value};
use crate::error::{Error, Result};
use crate::feedback::{FeedbackSystem, PerAxis};
use crate::langevin::{
    cold_damping_oscillator, simulate_oscillator, simulate_parametric, thermal_oscillator, DriveMode, Scheme,
    SimConfig,
};
use crate::optics::Axis;
use crate::optimize::log_space;
use crate::records;
use crate::report::{reproduce, ReproduceOptions};
use crate::scenario::{Optics, Scenario};
use crate::spectra::{position_kernel, power_noise_psd, PowerNoiseSource, SpectralKernel};
use crate::thermo::thermal_force_psd;

pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "levopt", version, about = "Noise budgets for levitated-nanoparticle optomechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario file, or the name of a bundled scenario (kiesel, gieseler).
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario pressure, in mbar.
    #[arg(long)]
    pressure: Option<f64>,
    /// Sweep, e.g. `pressure=1e-10:1e-3:40,log` (pressure in mbar).
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OutFormat {
    Json,
    Csv,
    Table,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
            OutFormat::Table => Format::Table,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Axis {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum SimKind {
    Thermal,
    Parametric,
    ColdDamping,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum SchemeArg {
    Exact,
    SemiImplicit,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum ModeArg {
    Joint,
    Pregenerated,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Force coefficients and trap frequencies.
    Coeffs(Common),
    /// Particle temperature, drag rates and power balance.
    Temperature(Common),
    /// Sampled spectral kernels as CSV (omega_rad_s, value, kind).
    Psd(Common),
    /// Cavity phonon budget.
    Cavity {
        #[command(flatten)]
        common: Common,
        /// Cooling power in W, replacing the scenario's.
        #[arg(long)]
        cool_power: Option<f64>,
        /// Also report the cooling power needed for this occupation.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Feedback phonon budget.
    Feedback {
        #[command(flatten)]
        common: Common,
        /// Feedback gain Γ_FB/2π along z in Hz, replacing the scenario's.
        #[arg(long)]
        gain_z_hz: Option<f64>,
    },
    /// Feedback gain minimising the phonon number.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "z")]
        axis: AxisArg,
    },
    /// Langevin Monte Carlo.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "thermal")]
        kind: SimKind,
        #[arg(long, value_enum, default_value = "exact")]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value = "joint")]
        mode: ModeArg,
        #[arg(long, default_value_t = 64)]
        ensemble: usize,
        /// Step in s.
        #[arg(long)]
        dt: Option<f64>,
        /// Duration in s.
        #[arg(long)]
        duration: Option<f64>,
        /// Feedback gain Γ_FB/2π in Hz for cold damping (default: optimum).
        #[arg(long)]
        gain_hz: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the first trajectory as CSV (t_s, z_m, v_m_s).
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Check the published numbers and model properties.
    Reproduce {
        /// Scenario file or bundled name; both bundled scenarios by default.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2013)]
        seed: u64,
        /// Skip the Monte Carlo claims.
        #[arg(long)]
        quick: bool,
    },
}

/// Parsed `<axis>=<lo>:<hi>:<n>[,log]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: String,
    pub values: Vec<f64>,
}

pub fn parse_sweep(spec: &str) -> Result<Sweep> {
    let bad = || Error::invalid("sweep", format!("`{spec}` is not <axis>=<lo>:<hi>:<n>[,log]"));
    let (axis, range) = spec.split_once('=').ok_or_else(bad)?;
    let (range, log) = match range.strip_suffix(",log") {
        Some(r) => (r, true),
        None => (range.strip_suffix(",lin").unwrap_or(range), false),
    };
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let values = if log {
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::invalid("sweep", "a log sweep needs positive bounds"));
        }
        log_space(lo, hi, n)
    } else if n == 1 {
        vec![lo]
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    Ok(Sweep {
        axis: axis.trim().to_string(),
        values,
    })
}

fn scenario_from(path: &Path) -> Result<Scenario> {
    load_scenario_file(path)
}

/// Scenario at each requested pressure, with the pressure in mbar.
fn pressure_points(common: &Common) -> Result<(Vec<(f64, Scenario)>, bool)> {
    let base = scenario_from(&common.scenario)?;
    let base = match common.pressure {
        Some(p) => base.with_pressure(mbar(p)),
        None => base,
    };
    match &common.sweep {
        None => {
            let p = base.gas.pressure / mbar(1.0);
            Ok((vec![(p, base)], false))
        }
        Some(spec) => {
            let sweep = parse_sweep(spec)?;
            if sweep.axis != "pressure" {
                return Err(Error::invalid("sweep", format!("cannot sweep `{}` here", sweep.axis)));
            }
            let points = sweep.values.iter().map(|&p| (p, base.with_pressure(mbar(p)))).collect();
            Ok((points, true))
        }
    }
}

/// Evaluates `f` at every sweep point in parallel, keeping sweep order.
fn over_pressures(common: &Common, f: impl Fn(f64, &Scenario) -> Result<Record> + Sync) -> Result<(Vec<Record>, bool)> {
    let (points, swept) = pressure_points(common)?;
    let records = points
        .par_iter()
        .map(|(p, s)| f(*p, s))
        .collect::<Result<Vec<_>>>()?;
    Ok((records, swept))
}

fn with_pressure(p: f64, r: Record) -> Record {
    let mut out = Record::new().num("pressure_mbar", p);
    out.fields.extend(r.fields);
    out
}

fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Serialization(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Serialization(e.to_string()))
        }
    }
}

fn finish(records: &[Record], swept: bool, common: &Common) -> Result<()> {
    let format = common
        .format
        .map(Format::from)
        .unwrap_or(if swept { Format::Csv } else { Format::Table });
    write_output(&emit(records, format)?, common.out.as_deref())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Coeffs(common) => {
            let (records, swept) = over_pressures(&common, |p, s| Ok(with_pressure(p, records::coefficients_record(s)?)))?;
            finish(&records, swept, &common)?;
        }
        Command::Temperature(common) => {
            let (records, swept) = over_pressures(&common, |p, s| {
                Ok(with_pressure(p, records::temperature_record(&records::scenario_thermal(s)?)))
            })?;
            finish(&records, swept, &common)?;
        }
        Command::Psd(common) => {
            let records = psd_records(&common)?;
            let common = Common {
                format: common.format.or(Some(OutFormat::Csv)),
                ..common
            };
            finish(&records, true, &common)?;
        }
        Command::Cavity {
            common,
            cool_power,
            target,
        } => {
            let (records, swept) = over_pressures(&common, |p, s| {
                let sys = CavitySystem::new(s)?;
                let b = sys.budget_with_cooling(cool_power.unwrap_or(sys.setup.cool_power));
                let escape = escape_assessment(&b, sys.setup.wavelength);
                let mut r = with_pressure(p, records::cavity_budget_record(&b, &escape));
                if let Some(t) = target {
                    let needed = match sys.required_cooling_power(t) {
                        Ok(w) => Value::Number(w),
                        Err(Error::Infeasible(_)) => Value::Text("infeasible".into()),
                        Err(e) => return Err(e),
                    };
                    r = r.num("target_phonons", t).value("required_cool_power_w", needed);
                }
                Ok(r)
            })?;
            finish(&records, swept, &common)?;
        }
        Command::Feedback { common, gain_z_hz } => {
            let (records, swept) = over_pressures(&common, |p, s| {
                let sys = FeedbackSystem::new(s)?;
                let mut gains: PerAxis<f64> = sys.gains;
                if let Some(g) = gain_z_hz {
                    gains.z = 2.0 * std::f64::consts::PI * g;
                }
                Ok(with_pressure(p, records::feedback_budget_record(&sys.budget_with_gains(gains))))
            })?;
            finish(&records, swept, &common)?;
        }
        Command::Optimize { common, axis } => {
            let (records, swept) = over_pressures(&common, |p, s| {
                let o = FeedbackSystem::new(s)?.optimize_gain(axis.into())?;
                Ok(records::optimum_record(p, &o))
            })?;
            finish(&records, swept, &common)?;
        }
        Command::Simulate {
            common,
            kind,
            scheme,
            mode,
            ensemble,
            dt,
            duration,
            gain_hz,
            seed,
            trajectory,
        } => {
            if common.sweep.is_some() {
                return Err(Error::invalid("sweep", "simulate runs a single point"));
            }
            let (points, _) = pressure_points(&common)?;
            let (p, s) = &points[0];
            let scheme = match scheme {
                SchemeArg::Exact => Scheme::ExactOU,
                SchemeArg::SemiImplicit => Scheme::SemiImplicit,
            };
            let settings = SimSettings {
                kind,
                scheme,
                mode: match mode {
                    ModeArg::Joint => DriveMode::Joint,
                    ModeArg::Pregenerated => DriveMode::Pregenerated,
                },
                ensemble,
                dt,
                duration,
                gain_hz,
                seed,
                trajectory: trajectory.as_deref(),
            };
            let r = with_pressure(*p, simulate(s, &settings)?);
            finish(&[r], false, &common)?;
        }
        Command::Reproduce {
            scenario,
            format,
            out,
            seed,
            quick,
        } => {
            let scenarios = match scenario {
                Some(path) => vec![scenario_from(&path)?],
                None => vec![
                    load_scenario(bundled("kiesel").expect("bundled"))?,
                    load_scenario(bundled("gieseler").expect("bundled"))?,
                ],
            };
            let report = reproduce(
                &scenarios,
                ReproduceOptions {
                    monte_carlo: !quick,
                    seed,
                },
            );
            let format = format.map(Format::from).unwrap_or(Format::Table);
            write_output(&emit(&report.records(), format)?, out.as_deref())?;
            if !report.passed() {
                return Ok(EXIT_CLAIM_FAILED);
            }
        }
    }
    Ok(0)
}

/// Kernels sampled over ω; the default grid is 0 to 3Ω_z.
fn psd_records(common: &Common) -> Result<Vec<Record>> {
    let base = scenario_from(&common.scenario)?;
    let s = match common.pressure {
        Some(p) => base.with_pressure(mbar(p)),
        None => base,
    };
    let (kernels, omega_z, mass, damping, temperature): (Vec<SpectralKernel>, f64, f64, f64, f64) = match &s.optics {
        Optics::Cavity(_) => {
            let sys = CavitySystem::new(&s)?;
            let t = sys.thermal.drag.effective_temperature;
            let power = power_noise_psd(PowerNoiseSource::Intracavity {
                mean_power: sys.setup.lev_power,
                photon_number: sys.lev_photons(),
                linewidth: sys.setup.lev_linewidth,
                detuning: 0.0,
            });
            let position = position_kernel(sys.mass, sys.damping(), sys.trap_frequency, t);
            (vec![position, power.kernel], sys.trap_frequency, sys.mass, sys.damping(), t)
        }
        Optics::Lens(lens) => {
            let sys = FeedbackSystem::new(&s)?;
            let t = sys.thermal.drag.effective_temperature;
            let power = power_noise_psd(PowerNoiseSource::LaserOutput {
                mean_power: lens.laser_power,
                angular_frequency: lens.angular_frequency(),
            });
            let position = position_kernel(sys.mass, sys.damping(), sys.frequencies.z, t);
            (vec![position, power.kernel], sys.frequencies.z, sys.mass, sys.damping(), t)
        }
    };
    let omegas = match &common.sweep {
        Some(spec) => {
            let sweep = parse_sweep(spec)?;
            if sweep.axis != "omega" {
                return Err(Error::invalid("sweep", "psd sweeps `omega` (rad/s)"));
            }
            sweep.values
        }
        None => (0..=600).map(|i| 3.0 * omega_z * f64::from(i) / 600.0).collect(),
    };
    let mut records = Vec::new();
    for k in &kernels {
        for &w in &omegas {
            records.push(Record::new().num("omega_rad_s", w).num("value", k.eval(w)).text("kind", k.kind()));
        }
    }
    for &w in &omegas {
        records.push(
            Record::new()
                .num("omega_rad_s", w)
                .num("value", thermal_force_psd(w, mass, damping, temperature))
                .text("kind", "thermal_force"),
        );
    }
    Ok(records)
}

struct SimSettings<'a> {
    kind: SimKind,
    scheme: Scheme,
    mode: DriveMode,
    ensemble: usize,
    dt: Option<f64>,
    duration: Option<f64>,
    gain_hz: Option<f64>,
    seed: u64,
    trajectory: Option<&'a Path>,
}

fn simulate(s: &Scenario, set: &SimSettings) -> Result<Record> {
    let head = Record::new()
        .text("kind", format!("{:?}", set.kind).to_lowercase())
        .text("scheme", format!("{:?}", set.scheme))
        .int("seed", set.seed as i64)
        .int("ensemble", set.ensemble as i64);
    if set.kind == SimKind::Parametric {
        if set.trajectory.is_some() {
            return Err(Error::invalid("trajectory", "available for thermal and cold-damping runs"));
        }
        let sys = CavitySystem::new(s)?;
        let cfg = SimConfig {
            dt: set.dt.unwrap_or(0.01 / sys.trap_frequency),
            duration: set.duration.unwrap_or(500.0 / sys.trap_frequency),
            seed: set.seed,
            ensemble: set.ensemble,
            scheme: set.scheme,
            record: false,
        };
        let r = simulate_parametric(s, &cfg, set.mode, 1.0)?;
        let mut out = head;
        out.fields.extend(
            Record::new()
                .text("drive", format!("{:?}", set.mode).to_lowercase())
                .num("dt_s", cfg.dt)
                .num("duration_s", cfg.duration)
                .num("variance_m2", r.variance.mean)
                .num("standard_error_m2", r.variance.standard_error)
                .num("predicted_m2", r.predicted)
                .num("stationary_m2", r.stationary)
                .num("cross_m2", r.cross.mean)
                .num("cross_standard_error_m2", r.cross.standard_error)
                .num("thermal_m2", r.thermal.mean)
                .num("rms_ratio", r.rms_ratio)
                .flag("perturbative", r.perturbative)
                .fields,
        );
        return Ok(out);
    }
    let osc = match set.kind {
        SimKind::Thermal => thermal_oscillator(s)?,
        _ => {
            let sys = FeedbackSystem::new(s)?;
            let gain = match set.gain_hz {
                Some(g) => 2.0 * std::f64::consts::PI * g,
                None => sys.optimize_gain(Axis::Z)?.gain,
            };
            cold_damping_oscillator(&sys, Axis::Z, gain, true)
        }
    };
    let fastest = osc.frequency.max(osc.damping);
    let dt = set.dt.unwrap_or(match set.scheme {
        Scheme::ExactOU => 0.1 / osc.damping,
        Scheme::SemiImplicit => 0.01 / fastest,
    });
    let duration = set.duration.unwrap_or(match set.scheme {
        Scheme::ExactOU => 200.0 / osc.damping,
        Scheme::SemiImplicit => (200.0 / osc.damping).min(2e6 * dt),
    });
    let cfg = SimConfig {
        dt,
        duration,
        seed: set.seed,
        ensemble: set.ensemble,
        scheme: set.scheme,
        record: set.trajectory.is_some(),
    };
    let r = simulate_oscillator(&osc, &cfg)?;
    if let (Some(path), Some(points)) = (set.trajectory, &r.trajectory) {
        let rows: Vec<Record> = points
            .iter()
            .map(|p| Record::new().num("t_s", p.t).num("z_m", p.z).num("v_m_s", p.v))
            .collect();
        write_output(&emit(&rows, Format::Csv)?, Some(path))?;
    }
    let mut out = head;
    out.fields.extend(
        Record::new()
            .num("dt_s", dt)
            .num("duration_s", duration)
            .num("damping_rad_s", osc.damping)
            .num("variance_m2", r.variance.mean)
            .num("standard_error_m2", r.variance.standard_error)
            .num("expected_m2", r.expected)
            .num("rms_m", r.variance.mean.sqrt())
            .value("deviation_standard_errors", Value::bounded(r.variance.deviation(r.expected)))
            .value("effective_samples", Value::bounded(r.effective_samples))
            .int("batches", r.variance.batches as i64)
            .fields,
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grammar() {
        let s = parse_sweep("pressure=1e-10:1e-3:40,log").unwrap();
        assert_eq!(s.axis, "pressure");
        assert_eq!(s.values.len(), 40);
        assert!((s.values[0] - 1e-10).abs() < 1e-24 && (s.values[39] / 1e-3 - 1.0).abs() < 1e-12);
        let s = parse_sweep("omega=0:10:11").unwrap();
        assert_eq!(s.values[3], 3.0);
        assert!(parse_sweep("pressure=1:2").is_err());
        assert!(parse_sweep("pressure=0:1:3,log").is_err());
        assert!(parse_sweep("pressure").is_err());
    }
}
