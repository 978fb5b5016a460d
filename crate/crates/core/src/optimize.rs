//! One-dimensional root finding and minimisation.

use crate::error::{Error, Result};

/// Root of a continuous `f` with a sign change on [lo, hi], bisected until
/// the bracket can no longer shrink or its relative width is below `rel`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoRoot(format!("no sign change on [{lo:e}, {hi:e}]")));
    }
    while (hi - lo) > rel * lo.abs().max(hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimiser of a unimodal `f` on [lo, hi] by golden-section search, to
/// bracket width `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
        if a >= b {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Samples of an objective on a logarithmic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LogScan {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

impl LogScan {
    pub fn new<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Self {
        let points = log_space(lo, hi, n);
        let values = points.iter().map(|&x| f(x)).collect();
        LogScan { points, values }
    }

    /// Index of the smallest sample.
    pub fn argmin(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Number of strict local minima, counting plateaus once.
    pub fn local_minima(&self) -> usize {
        let v = &self.values;
        let n = v.len();
        let mut count = 0;
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            let left = i == 0 || v[i - 1] > v[i];
            let right = j + 1 == n || v[j + 1] > v[i];
            if left && right {
                count += 1;
            }
            i = j + 1;
        }
        count
    }
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

/// Minimiser of `f` on [lo, hi] (lo > 0): a `coarse`-point log scan that
/// must show a single interior minimum, then golden-section refinement in
/// ln x to relative precision `rel`.
pub fn minimize_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, coarse: usize, rel: f64) -> Result<f64> {
    let scan = LogScan::new(&f, lo, hi, coarse);
    let minima = scan.local_minima();
    if minima > 1 {
        return Err(Error::NonUnimodal(minima));
    }
    let i = scan.argmin();
    if i == 0 || i + 1 == scan.points.len() {
        return Err(Error::OptimumAtBoundary(scan.points[i]));
    }
    let (a, b) = (scan.points[i - 1].ln(), scan.points[i + 1].ln());
    Ok(golden_section(|u| f(u.exp()), a, b, rel).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-9), Err(Error::NoRoot(_))));
    }

    #[test]
    fn golden_parabola() {
        let x = golden_section(|x| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn counts_minima() {
        let s = LogScan::new(|x: f64| (x.ln()).sin(), 1.0, 1e6, 200);
        assert!(s.local_minima() >= 2);
        let s = LogScan::new(|x: f64| (x.ln() - 3.0).powi(2), 1.0, 1e6, 64);
        assert_eq!(s.local_minima(), 1);
    }

    #[test]
    fn log_minimizer() {
        let f = |x: f64| x + 100.0 / x;
        let x = minimize_log(f, 1e-3, 1e4, 64, 1e-3).unwrap();
        assert!((x / 10.0 - 1.0).abs() < 1e-3);
        assert!(matches!(minimize_log(|x: f64| x, 1.0, 10.0, 16, 1e-3), Err(Error::OptimumAtBoundary(_))));
        assert!(matches!(
            minimize_log(|x: f64| (x.ln()).sin(), 1.0, 1e6, 64, 1e-3),
            Err(Error::NonUnimodal(_))
        ));
    }
}
