//! Exact one-step propagator of a damped oscillator driven by white noise.
//!
//! For ẋ = Ax + (0, σξ)ᵀ with A = [[0, 1], [−Ω², −Γ]] the state after a
//! step h is Φx + η, where Φ = e^{Ah} and η is Gaussian with covariance
//! Q = σ²∫₀ʰ Φ(s)e₂e₂ᵀΦ(s)ᵀds. Writing p(s) for the (1, 2) entry of Φ(s),
//! every entry of Q follows from J = ∫₀ʰ p² and the end values of p and p′,
//! which avoids the cancellation in Σ∞ − ΦΣ∞Φᵀ when Γh is tiny.

use num_complex::Complex64;

use crate::quadrature::{integrate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    /// e^{Ah}, row major.
    pub phi: [[f64; 2]; 2],
    /// Lower Cholesky factor of the step noise covariance.
    pub chol: [[f64; 2]; 2],
}

/// p(s) and p′(s) for the homogeneous solution with p(0) = 0, p′(0) = 1.
fn impulse(frequency: f64, damping: f64, s: f64) -> (f64, f64) {
    let half = damping / 2.0;
    let disc = frequency * frequency - half * half;
    let (c, sn) = if disc > 0.0 {
        let w = disc.sqrt();
        ((w * s).cos(), (w * s).sin() / w)
    } else if disc < 0.0 {
        let w = (-disc).sqrt();
        ((w * s).cosh(), (w * s).sinh() / w)
    } else {
        (1.0, s)
    };
    let decay = (-half * s).exp();
    (decay * sn, decay * (c - half * sn))
}

/// J = ∫₀ʰ p(s)² ds.
fn impulse_energy(frequency: f64, damping: f64, step: f64) -> f64 {
    let disc = frequency * frequency - damping * damping / 4.0;
    if disc > 0.0 && disc.sqrt() * step > 1.0 {
        // many periods: closed form, no cancellation once ω_d h > 1
        let w = disc.sqrt();
        let decay = if damping > 0.0 { -(-damping * step).exp_m1() / damping } else { step };
        let z = Complex64::new(damping, -2.0 * w);
        let oscillating = ((1.0 - (-z * step).exp()) / z).re;
        return (decay - oscillating) / (2.0 * w * w);
    }
    let tol = Tolerance { rel: 1e-13, abs: 0.0, max_intervals: 4096 };
    integrate(|s| impulse(frequency, damping, s).0.powi(2), 0.0, step, tol)
        .expect("smooth integrand over at most one period")
}

impl Propagator {
    /// `noise` is σ², the acceleration noise intensity S_F/M².
    pub fn new(frequency: f64, damping: f64, noise: f64, step: f64) -> Self {
        let w2 = frequency * frequency;
        let (p, dp) = impulse(frequency, damping, step);
        // Φ = [[p′ + Γp, p], [−Ω²p, p′]]
        let phi = [[dp + damping * p, p], [-w2 * p, dp]];
        let j = if noise > 0.0 { impulse_energy(frequency, damping, step) } else { 0.0 };
        let q11 = noise * j;
        let q12 = noise * p * p / 2.0;
        let q22 = noise * (p * dp + damping * p * p / 2.0 + w2 * j);
        let l11 = q11.sqrt();
        let l21 = if l11 > 0.0 { q12 / l11 } else { 0.0 };
        let l22 = (q22 - l21 * l21).max(0.0).sqrt();
        Propagator {
            phi,
            chol: [[l11, 0.0], [l21, l22]],
        }
    }

    #[inline]
    pub fn step(&self, z: f64, v: f64, n1: f64, n2: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.phi;
        let [[l11, _], [l21, l22]] = self.chol;
        (a * z + b * v + l11 * n1, c * z + d * v + l21 * n1 + l22 * n2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        c
    }

    #[test]
    fn stationary_covariance_is_preserved() {
        // Σ∞ = Φ Σ∞ Φᵀ + Q, checked where the subtraction is well conditioned
        for (w, g, h) in [(1.0, 0.3, 0.7), (2.0, 5.0, 0.2), (1.0, 2.0, 0.5), (1.0, 0.3, 1.5), (1.0, 0.01, 400.0)] {
            let s2 = 1.7;
            let pr = Propagator::new(w, g, s2, h);
            let sigma = [[s2 / (2.0 * g * w * w), 0.0], [0.0, s2 / (2.0 * g)]];
            let phi_t = [[pr.phi[0][0], pr.phi[1][0]], [pr.phi[0][1], pr.phi[1][1]]];
            let prop = mul(mul(pr.phi, sigma), phi_t);
            let l = pr.chol;
            let q = [
                [l[0][0] * l[0][0], l[0][0] * l[1][0]],
                [l[1][0] * l[0][0], l[1][0] * l[1][0] + l[1][1] * l[1][1]],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    let lhs = prop[i][j] + q[i][j];
                    assert!((lhs - sigma[i][j]).abs() < 1e-12 * (sigma[0][0] + sigma[1][1]), "{w} {g} {h}");
                }
            }
        }
    }

    #[test]
    fn tiny_damping_keeps_noise() {
        let pr = Propagator::new(1.2e6, 2.5e-3, 1.0, 0.01 / 1.2e6);
        let h: f64 = 0.01 / 1.2e6;
        // leading order Q ≈ σ²[[h³/3, h²/2], [h²/2, h]]
        assert!((pr.chol[0][0].powi(2) / (h.powi(3) / 3.0) - 1.0).abs() < 1e-3);
        assert!((pr.chol[1][1].powi(2) / (h / 4.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn undriven_motion_is_deterministic() {
        let pr = Propagator::new(1.0, 0.0, 0.0, std::f64::consts::PI);
        let (z, v) = pr.step(1.0, 0.0, 5.0, 5.0);
        assert!((z + 1.0).abs() < 1e-12 && v.abs() < 1e-12);
    }
}
