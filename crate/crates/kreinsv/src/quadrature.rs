//! Gauss–Legendre rules, local adaptive refinement and the periodic trapezoid rule.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const ORDER: usize = 16;
const MAX_DEPTH: usize = 48;

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn apply(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        h * self.x.iter().zip(&self.w).map(|(x, w)| w * f(m + h * x)).sum::<f64>()
    }
}

/// ∫_a^b f with 16-point Gauss–Legendre panels, bisected where a panel and its
/// two halves disagree by more than its share of `tol` relative to the total.
/// A child panel gets the parent's share divided by √2.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_panels(f, a, b, tol, 8)
}

/// As [`adaptive`], starting from `panels` equal panels.
pub fn adaptive_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, panels: usize) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (x, w) = gauss_legendre(ORDER);
    let rule = Rule { x, w };
    let h = (b - a) / panels as f64;
    let coarse: Vec<f64> = (0..panels).map(|i| rule.apply(f, a + i as f64 * h, a + (i + 1) as f64 * h)).collect();
    let scale = coarse.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    for (i, c) in coarse.into_iter().enumerate() {
        let lo = a + i as f64 * h;
        total += refine(f, &rule, lo, lo + h, c, tol * scale / panels as f64, 0)?;
    }
    if !total.is_finite() {
        return Err(Error::NoConvergence(format!("non-finite integral on [{a}, {b}]")));
    }
    Ok(total)
}

fn refine(f: &dyn Fn(f64) -> f64, rule: &Rule, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = rule.apply(f, a, m);
    let right = rule.apply(f, m, b);
    if (left + right - whole).abs() <= tol {
        return Ok(left + right);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NoConvergence(format!("quadrature depth exceeded near {m}")));
    }
    Ok(refine(f, rule, a, m, left, tol * FRAC_1_SQRT_2, depth + 1)? + refine(f, rule, m, b, right, tol * FRAC_1_SQRT_2, depth + 1)?)
}

/// Trapezoid rule over one period, starting at `m` points and doubling until
/// two successive sums agree to `tol` relative.
pub fn periodic_trapezoid(f: &dyn Fn(f64) -> f64, period: f64, m: usize, tol: f64) -> Result<f64> {
    let mut k = m.max(2);
    let mut raw: f64 = (0..k).map(|i| f(period * i as f64 / k as f64)).sum();
    let mut prev = raw * period / k as f64;
    for _ in 0..12 {
        raw += (0..k).map(|i| f(period * (i as f64 + 0.5) / k as f64)).sum::<f64>();
        k *= 2;
        let next = raw * period / k as f64;
        if (next - prev).abs() <= tol * next.abs().max(f64::MIN_POSITIVE) || next == prev {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence(format!("trapezoid rule unstable at {k} points")))
}
