//! Classical Langevin Monte Carlo for the closed-form variances.
//!
//! Three experiments:
//!
//! * [`simulate_thermal`]: a damped oscillator in a white thermal bath of
//!   intensity 2MΓk_BT_eff, for equipartition;
//! * [`simulate_parametric`]: the levitating-field noise displacement z_G,
//!   driven by −A_G,Z δP z_T with δP an Ornstein-Uhlenbeck process of rate
//!   κ/2 and variance P̄²/N̄ (its spectrum is (P̄²/N̄)L_κ);
//! * [`simulate_cold_damping`]: velocity feedback with white imprecision
//!   noise, whose force spectrum (MΓ_FBΩ)²S_u reproduces the shot-noise
//!   phonon formula.
//!
//! Every trajectory owns a ChaCha8 stream selected by its index, and
//! per-trajectory statistics are reduced in index order, so results do not
//! depend on the number of worker threads.
//!
//! The exact scheme samples the linear dynamics at any step. The
//! semi-implicit scheme (symplectic Euler, implicit damping) needs
//! dt ≤ 0.01/max(Ω, Γ, κ).

mod propagator;

pub use propagator::Propagator;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cavity::CavitySystem;
use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};
use crate::feedback::FeedbackSystem;
use crate::optics::Axis;
use crate::scenario::{Optics, Scenario};

/// Number of time blocks used for batch means when the ensemble is small.
pub const MIN_BATCHES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExactOU,
    SemiImplicit,
}

/// How the thermal drive of the parametric experiment is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveMode {
    /// z_T and z_G advance together from one random stream.
    Joint,
    /// The whole z_T path is generated first from its own stream.
    Pregenerated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Step, or sampling interval for the exact scheme, in s.
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    pub ensemble: usize,
    pub scheme: Scheme,
    /// Keep (t, z, v) of the first trajectory.
    pub record: bool,
}

impl SimConfig {
    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.duration >= self.dt) {
            return Err(Error::invalid("sim.dt", "need 0 < dt ≤ duration"));
        }
        if self.ensemble == 0 {
            return Err(Error::invalid("sim.ensemble", "must be at least 1"));
        }
        Ok((self.duration / self.dt).round() as usize)
    }

    fn check_step(&self, rates: &[f64]) -> Result<()> {
        let fastest = rates.iter().cloned().fold(0.0, f64::max);
        let limit = 0.01 / fastest;
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Unstable { dt: self.dt, limit });
        }
        Ok(())
    }
}

/// Mean of per-batch values with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub standard_error: f64,
    pub batches: usize,
}

impl Estimate {
    /// |mean − value| in standard errors.
    pub fn deviation(&self, value: f64) -> f64 {
        (self.mean - value).abs() / self.standard_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub z: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// ⟨z²⟩ in m².
    pub variance: Estimate,
    /// Closed-form stationary ⟨z²⟩ for the simulated model.
    pub expected: f64,
    /// 2(mean/SE)², the number of independent Gaussian samples with the
    /// same precision.
    pub effective_samples: f64,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// A damped oscillator in white force noise of two-sided intensity
/// `force_psd` (N²s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub mass: f64,
    pub frequency: f64,
    pub damping: f64,
    pub force_psd: f64,
}

impl Oscillator {
    pub fn thermal(mass: f64, frequency: f64, damping: f64, temperature: f64) -> Self {
        Oscillator {
            mass,
            frequency,
            damping,
            force_psd: 2.0 * mass * damping * BOLTZMANN * temperature,
        }
    }

    /// Acceleration noise intensity σ².
    fn noise(&self) -> f64 {
        self.force_psd / (self.mass * self.mass)
    }

    /// Stationary ⟨z²⟩ = S_F/(2M²Ω²Γ).
    pub fn stationary_variance(&self) -> f64 {
        if self.force_psd == 0.0 {
            return 0.0;
        }
        self.noise() / (2.0 * self.damping * self.frequency * self.frequency)
    }
}

/// Per-trajectory block sums of one statistic.
#[derive(Debug, Clone, Copy, Default)]
struct Blocks {
    sums: [f64; MIN_BATCHES],
    counts: [usize; MIN_BATCHES],
}

impl Blocks {
    #[inline]
    fn add(&mut self, index: usize, total: usize, value: f64) {
        let b = index * MIN_BATCHES / total.max(1);
        self.sums[b.min(MIN_BATCHES - 1)] += value;
        self.counts[b.min(MIN_BATCHES - 1)] += 1;
    }

    fn mean(&self) -> f64 {
        pairwise_sum(&self.sums) / self.counts.iter().sum::<usize>().max(1) as f64
    }
}

/// Sum by recursive halving; the result depends only on the order of
/// `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn batch_estimate(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = if values.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    Estimate {
        mean,
        standard_error: (var / n).sqrt(),
        batches: values.len(),
    }
}

/// Trajectories are the batches when there are enough of them; otherwise
/// time blocks pooled over trajectories are.
fn estimate(per_trajectory: &[Blocks]) -> Estimate {
    if per_trajectory.len() >= MIN_BATCHES {
        let means: Vec<f64> = per_trajectory.iter().map(Blocks::mean).collect();
        return batch_estimate(&means);
    }
    let blocks: Vec<f64> = (0..MIN_BATCHES)
        .filter_map(|b| {
            let sums: Vec<f64> = per_trajectory.iter().map(|t| t.sums[b]).collect();
            let count: usize = per_trajectory.iter().map(|t| t.counts[b]).sum();
            (count > 0).then(|| pairwise_sum(&sums) / count as f64)
        })
        .collect();
    batch_estimate(&blocks)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws from the stationary distribution of `osc`.
fn stationary_state(osc: &Oscillator, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let var_z = osc.stationary_variance();
    let var_v = var_z * osc.frequency * osc.frequency;
    (var_z.sqrt() * normal(rng), var_v.sqrt() * normal(rng))
}

/// One-step update for either scheme.
#[derive(Debug, Clone, Copy)]
enum Stepper {
    Exact(Propagator),
    Semi { w2: f64, gamma: f64, dt: f64, kick: f64 },
}

impl Stepper {
    fn new(osc: &Oscillator, dt: f64, scheme: Scheme) -> Self {
        match scheme {
            Scheme::ExactOU => Stepper::Exact(Propagator::new(osc.frequency, osc.damping, osc.noise(), dt)),
            Scheme::SemiImplicit => Stepper::Semi {
                w2: osc.frequency * osc.frequency,
                gamma: osc.damping,
                dt,
                kick: (osc.noise() * dt).sqrt(),
            },
        }
    }

    /// Advances by one step, adding `accel` (m/s²) as an external
    /// acceleration in the semi-implicit scheme.
    #[inline]
    fn advance(&self, z: f64, v: f64, accel: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match *self {
            Stepper::Exact(p) => {
                let n1 = normal(rng);
                let n2 = normal(rng);
                p.step(z, v, n1, n2)
            }
            Stepper::Semi { w2, gamma, dt, kick } => {
                let v = (v + dt * (accel - w2 * z) + kick * normal(rng)) / (1.0 + gamma * dt);
                (z + dt * v, v)
            }
        }
    }
}

/// ⟨z²⟩ of `osc` from `cfg.ensemble` trajectories started in the
/// stationary state.
pub fn simulate_oscillator(osc: &Oscillator, cfg: &SimConfig) -> Result<SimResult> {
    let steps = cfg.steps()?;
    if cfg.scheme == Scheme::SemiImplicit {
        cfg.check_step(&[osc.frequency, osc.damping])?;
    }
    if osc.force_psd > 0.0 && !(osc.damping > 0.0) {
        return Err(Error::invalid("damping", "a driven oscillator needs positive damping"));
    }
    if osc.damping > 0.0 && cfg.duration < 50.0 / osc.damping {
        warn!(
            "duration {:.3e} s is shorter than 50 damping times ({:.3e} s)",
            cfg.duration,
            50.0 / osc.damping
        );
    }
    let stepper = Stepper::new(osc, cfg.dt, cfg.scheme);
    let run = |k: usize| {
        let mut rng = rng_for(cfg.seed, k as u64);
        let (mut z, mut v) = stationary_state(osc, &mut rng);
        let mut blocks = Blocks::default();
        let mut path = (cfg.record && k == 0).then(|| Vec::with_capacity(steps + 1));
        if let Some(p) = path.as_mut() {
            p.push(TrajectoryPoint { t: 0.0, z, v });
        }
        for i in 0..steps {
            (z, v) = stepper.advance(z, v, 0.0, &mut rng);
            blocks.add(i, steps, z * z);
            if let Some(p) = path.as_mut() {
                p.push(TrajectoryPoint { t: (i + 1) as f64 * cfg.dt, z, v });
            }
        }
        (blocks, path)
    };
    let runs: Vec<(Blocks, Option<Vec<TrajectoryPoint>>)> = (0..cfg.ensemble).into_par_iter().map(run).collect();
    let mut trajectory = None;
    let mut blocks = Vec::with_capacity(runs.len());
    for (b, p) in runs {
        blocks.push(b);
        if p.is_some() {
            trajectory = p;
        }
    }
    let variance = estimate(&blocks);
    Ok(SimResult {
        effective_samples: effective(&variance),
        variance,
        expected: osc.stationary_variance(),
        trajectory,
    })
}

fn effective(e: &Estimate) -> f64 {
    if e.standard_error > 0.0 {
        2.0 * (e.mean / e.standard_error).powi(2)
    } else {
        f64::INFINITY
    }
}

/// Oscillator along z for the thermal bath of a scenario.
pub fn thermal_oscillator(scenario: &Scenario) -> Result<Oscillator> {
    match scenario.optics {
        Optics::Cavity(_) => {
            let sys = CavitySystem::new(scenario)?;
            Ok(Oscillator::thermal(
                sys.mass,
                sys.trap_frequency,
                sys.damping(),
                sys.thermal.drag.effective_temperature,
            ))
        }
        Optics::Lens(_) => {
            let sys = FeedbackSystem::new(scenario)?;
            Ok(Oscillator::thermal(
                sys.mass,
                sys.frequencies.z,
                sys.damping(),
                sys.thermal.drag.effective_temperature,
            ))
        }
    }
}

/// Thermal motion along z, to compare with k_BT_eff/(MΩ²).
pub fn simulate_thermal(scenario: &Scenario, cfg: &SimConfig) -> Result<SimResult> {
    simulate_oscillator(&thermal_oscillator(scenario)?, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricResult {
    /// Window average of ⟨z_G²⟩.
    pub variance: Estimate,
    /// Closed-form prediction for the same window.
    pub predicted: f64,
    /// Stationary closed-form ⟨z_G²⟩.
    pub stationary: f64,
    /// Window average of ⟨z_G z_T⟩.
    pub cross: Estimate,
    /// Window average of ⟨z_T²⟩.
    pub thermal: Estimate,
    /// rms z_G / rms z_T; the model assumes it is small.
    pub rms_ratio: f64,
    pub perturbative: bool,
}

/// Levitating-field noise experiment on a cavity scenario.
///
/// z_G starts at rest and is averaged over the second half of the run; its
/// closed-form mean there is ⟨z_G²⟩_∞ times the window mean of
/// 1 − e^{−Γt}. `power_noise_scale` multiplies the power-noise amplitude
/// (1 for the physical value).
pub fn simulate_parametric(
    scenario: &Scenario,
    cfg: &SimConfig,
    mode: DriveMode,
    power_noise_scale: f64,
) -> Result<ParametricResult> {
    let sys = CavitySystem::new(scenario)?;
    let steps = cfg.steps()?;
    let omega = sys.trap_frequency;
    let gamma = sys.damping();
    let kappa = sys.setup.lev_linewidth;
    cfg.check_step(&[omega, gamma, kappa])?;

    let thermal = Oscillator::thermal(sys.mass, omega, gamma, sys.thermal.drag.effective_temperature);
    let mean_power = sys.setup.lev_power;
    let power_sd = power_noise_scale * mean_power / sys.lev_photons().sqrt();
    let decay = (-0.5 * kappa * cfg.dt).exp();
    let innovation = power_sd * (-(-kappa * cfg.dt).exp_m1()).sqrt();
    let coupling = sys.coefficients.gradient_z / sys.mass;
    let stepper = Stepper::new(&thermal, cfg.dt, cfg.scheme);
    let w2 = omega * omega;
    let dt = cfg.dt;
    let window_start = steps / 2;
    let window = steps - window_start;

    let run = |k: usize| {
        let mut g_blocks = Blocks::default();
        let mut x_blocks = Blocks::default();
        let mut t_blocks = Blocks::default();
        let (mut zg, mut vg) = (0.0, 0.0);
        let mut drive = |i: usize, zt: f64, dp: f64, g: &mut Blocks, x: &mut Blocks, t: &mut Blocks| {
            let accel = -coupling * dp * zt;
            vg = (vg + dt * (accel - w2 * zg)) / (1.0 + gamma * dt);
            zg += dt * vg;
            if i >= window_start {
                let j = i - window_start;
                g.add(j, window, zg * zg);
                x.add(j, window, zg * zt);
                t.add(j, window, zt * zt);
            }
        };
        match mode {
            DriveMode::Joint => {
                let mut rng = rng_for(cfg.seed, 2 * k as u64);
                let (mut zt, mut vt) = stationary_state(&thermal, &mut rng);
                let mut dp = power_sd * normal(&mut rng);
                for i in 0..steps {
                    drive(i, zt, dp, &mut g_blocks, &mut x_blocks, &mut t_blocks);
                    (zt, vt) = stepper.advance(zt, vt, 0.0, &mut rng);
                    dp = decay * dp + innovation * normal(&mut rng);
                }
            }
            DriveMode::Pregenerated => {
                let mut rng_t = rng_for(cfg.seed, 2 * k as u64 + 1);
                let (mut zt, mut vt) = stationary_state(&thermal, &mut rng_t);
                let mut path = Vec::with_capacity(steps);
                for _ in 0..steps {
                    path.push(zt);
                    (zt, vt) = stepper.advance(zt, vt, 0.0, &mut rng_t);
                }
                let mut rng_p = rng_for(cfg.seed ^ 0x9e37_79b9_7f4a_7c15, 2 * k as u64 + 1);
                let mut dp = power_sd * normal(&mut rng_p);
                for (i, &zt) in path.iter().enumerate() {
                    drive(i, zt, dp, &mut g_blocks, &mut x_blocks, &mut t_blocks);
                    dp = decay * dp + innovation * normal(&mut rng_p);
                }
            }
        }
        (g_blocks, x_blocks, t_blocks)
    };
    let runs: Vec<(Blocks, Blocks, Blocks)> = (0..cfg.ensemble).into_par_iter().map(run).collect();
    let g: Vec<Blocks> = runs.iter().map(|r| r.0).collect();
    let x: Vec<Blocks> = runs.iter().map(|r| r.1).collect();
    let t: Vec<Blocks> = runs.iter().map(|r| r.2).collect();

    let stationary = 2.0 * sys.zero_point * sys.zero_point * sys.levitation_noise().phonons
        * power_noise_scale
        * power_noise_scale;
    // z_G is recorded after the update at step i, i.e. at t = (i + 1)dt
    let growth: Vec<f64> = (window_start..steps)
        .map(|i| -(-gamma * (i + 1) as f64 * dt).exp_m1())
        .collect();
    let predicted = stationary * pairwise_sum(&growth) / window as f64;
    let variance = estimate(&g);
    let thermal_est = estimate(&t);
    let rms_ratio = (variance.mean / thermal_est.mean).sqrt();
    Ok(ParametricResult {
        variance,
        predicted,
        stationary,
        cross: estimate(&x),
        thermal: thermal_est,
        rms_ratio,
        perturbative: rms_ratio < 0.1,
    })
}

/// Oscillator along `axis` under velocity feedback at `gain`. Without
/// `imprecision` the measurement is noiseless. The gradient and
/// radiation-pressure noise enter as extra white force noise of matching
/// phonon number.
pub fn cold_damping_oscillator(sys: &FeedbackSystem, axis: Axis, gain: f64, imprecision: bool) -> Oscillator {
    let m = sys.mass;
    let omega = sys.frequencies.get(axis);
    let gamma = sys.damping();
    let noise = sys.quantum_noise();
    let quantum = noise.gradient.get(axis) + if axis == Axis::Z { noise.radiation_pressure_z } else { 0.0 };
    let thermal = 2.0 * m * gamma * BOLTZMANN * sys.thermal.drag.effective_temperature;
    let extra = 2.0 * m * gamma * HBAR * omega * quantum;
    let measurement = if imprecision {
        (m * gain * omega).powi(2) * sys.imprecision(axis)
    } else {
        0.0
    };
    Oscillator {
        mass: m,
        frequency: omega,
        damping: gamma + gain,
        force_psd: thermal + extra + measurement,
    }
}

pub fn simulate_cold_damping(sys: &FeedbackSystem, axis: Axis, gain: f64, cfg: &SimConfig) -> Result<SimResult> {
    simulate_oscillator(&cold_damping_oscillator(sys, axis, gain, true), cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gain: f64,
    pub result: SimResult,
}

/// Simulated ⟨z²⟩ at each gain. Each point samples every 1/(Γ + Γ_FB)
/// over `relaxations` relaxation times.
pub fn cold_damping_sweep(
    sys: &FeedbackSystem,
    axis: Axis,
    gains: &[f64],
    relaxations: f64,
    ensemble: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    gains
        .iter()
        .map(|&gain| {
            let rate = sys.damping() + gain;
            let cfg = SimConfig {
                dt: 1.0 / rate,
                duration: relaxations / rate,
                seed,
                ensemble,
                scheme: Scheme::ExactOU,
                record: false,
            };
            Ok(SweepPoint {
                gain,
                result: simulate_cold_damping(sys, axis, gain, &cfg)?,
            })
        })
        .collect()
}

/// Gain with the smallest simulated variance.
pub fn empirical_optimum(points: &[SweepPoint]) -> Option<f64> {
    points
        .iter()
        .min_by(|a, b| a.result.variance.mean.total_cmp(&b.result.variance.mean))
        .map(|p| p.gain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dt: f64, duration: f64, ensemble: usize, scheme: Scheme) -> SimConfig {
        SimConfig {
            dt,
            duration,
            seed: 7,
            ensemble,
            scheme,
            record: false,
        }
    }

    #[test]
    fn equipartition_in_both_schemes() {
        let osc = Oscillator::thermal(1e-17, 2.0e3, 40.0, 300.0);
        let kt = BOLTZMANN * 300.0 / (1e-17 * 4e6);
        let exact = simulate_oscillator(&osc, &cfg(5e-3, 5.0, 64, Scheme::ExactOU)).unwrap();
        assert!(exact.variance.deviation(kt) < 3.0, "{:?}", exact.variance);
        let semi = simulate_oscillator(&osc, &cfg(5e-6, 1.5, 32, Scheme::SemiImplicit)).unwrap();
        assert!(semi.variance.deviation(kt) < 3.0, "{:?}", semi.variance);
        let combined = (exact.variance.standard_error.powi(2) + semi.variance.standard_error.powi(2)).sqrt();
        assert!((exact.variance.mean - semi.variance.mean).abs() < 3.0 * combined);
    }

    #[test]
    fn cold_bath_is_still() {
        let osc = Oscillator::thermal(1e-17, 2.0e3, 40.0, 0.0);
        let r = simulate_oscillator(&osc, &cfg(1e-3, 1.0, 4, Scheme::ExactOU)).unwrap();
        assert_eq!(r.variance.mean, 0.0);
    }

    #[test]
    fn coarse_semi_implicit_step_rejected() {
        let osc = Oscillator::thermal(1e-17, 2.0e3, 40.0, 300.0);
        let r = simulate_oscillator(&osc, &cfg(1e-4, 1.0, 4, Scheme::SemiImplicit));
        assert!(matches!(r, Err(Error::Unstable { .. })));
    }

    #[test]
    fn small_ensembles_use_time_blocks() {
        let osc = Oscillator::thermal(1e-17, 2.0e3, 40.0, 300.0);
        let r = simulate_oscillator(&osc, &cfg(5e-3, 5.0, 2, Scheme::ExactOU)).unwrap();
        assert_eq!(r.variance.batches, MIN_BATCHES);
        let r = simulate_oscillator(&osc, &cfg(5e-3, 1.0, 20, Scheme::ExactOU)).unwrap();
        assert_eq!(r.variance.batches, 20);
    }

    #[test]
    fn recording_keeps_first_trajectory() {
        let osc = Oscillator::thermal(1e-17, 2.0e3, 40.0, 300.0);
        let mut c = cfg(1e-3, 0.1, 3, Scheme::ExactOU);
        c.record = true;
        let r = simulate_oscillator(&osc, &c).unwrap();
        let t = r.trajectory.unwrap();
        assert_eq!(t.len(), 101);
        assert_eq!(t[0].t, 0.0);
    }

    #[test]
    fn pairwise_sum_matches_plain_sum() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
    }
}
