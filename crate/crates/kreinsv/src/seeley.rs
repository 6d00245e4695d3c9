//! Weyl-type constants for negative-order symbols on Σ and the three laws
//! s_k ~ C k^{−t/(n−1)} for the resolvent differences.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{transform_to_frame, BoundaryFrame, CoefficientField, Hypersurface};
use crate::quadrature::{adaptive_panels, periodic_trapezoid};
use crate::symbol::{kappa, operator_principal_symbol, Kind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemainderClass {
    LittleO,
    BigOOneBetter,
}

impl RemainderClass {
    pub fn name(self) -> &'static str {
        match self {
            RemainderClass::LittleO => "little_o",
            RemainderClass::BigOOneBetter => "big_O_one_better",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticLaw {
    pub kind: Kind,
    pub n: usize,
    /// ψdo order is −t.
    pub order: f64,
    /// t/(n−1).
    pub exponent: f64,
    pub c_prime: f64,
    pub constant: f64,
    pub remainder: RemainderClass,
}

/// Interaction strength on Σ: a constant or a real trigonometric polynomial
/// `a0 + Σ a_k cos kθ + b_k sin kθ` in the azimuth θ, stored as `[a0, a1, b1, a2, b2, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Strength {
    Constant(f64),
    Fourier(Vec<f64>),
}

impl Strength {
    pub fn eval_theta(&self, theta: f64) -> f64 {
        match self {
            Strength::Constant(v) => *v,
            Strength::Fourier(c) => {
                let mut s = c.first().copied().unwrap_or(0.0);
                for (k, ab) in c[1.min(c.len())..].chunks(2).enumerate() {
                    let (sn, cs) = ((k + 1) as f64 * theta).sin_cos();
                    s += ab[0] * cs + ab.get(1).copied().unwrap_or(0.0) * sn;
                }
                s
            }
        }
    }

    pub fn eval(&self, frame: &BoundaryFrame) -> f64 {
        let theta = if frame.n == 3 { frame.t[1] } else { frame.t[0] };
        self.eval_theta(theta)
    }

    /// True if the strength has a zero or a sign change on a 4096-point azimuth grid.
    pub fn vanishes(&self) -> bool {
        match self {
            Strength::Constant(v) => *v == 0.0,
            Strength::Fourier(_) => {
                let m = 4096;
                let first = self.eval_theta(0.0);
                (0..=m).any(|i| {
                    let v = self.eval_theta(2.0 * PI * i as f64 / m as f64);
                    v == 0.0 || v.signum() != first.signum()
                })
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Strength {
        match self {
            Strength::Constant(v) => Strength::Constant(s * v),
            Strength::Fourier(c) => Strength::Fourier(c.iter().map(|v| s * v).collect()),
        }
    }
}

/// c(P) = 1/((n−1)(2π)^{n−1}) ∫_Σ ∫_{|ξ′|=1} |p0|^{(n−1)/t} dω dσ.
///
/// `p0(frame, ξ′)` takes ξ′ in the frame's tangent coordinates and must be
/// positively homogeneous of degree −t; that is checked at a few sample points.
pub fn seeley_constant(p0: &dyn Fn(&BoundaryFrame, &[f64]) -> f64, t: f64, surface: &Hypersurface, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("order t = {t} must be positive")));
    }
    let n = surface.dim();
    let dom = surface.domain();
    for i in 0..5 {
        let s = (i as f64 + 0.37) / 5.0;
        let fr = surface.frame_at([dom[0].0 + s * (dom[0].1 - dom[0].0), dom[1].0 + s * (dom[1].1 - dom[1].0)]);
        let xi: &[f64] = if n == 2 { &[1.0] } else { &[0.6, 0.8] };
        let xi2: Vec<f64> = xi.iter().map(|v| 2.0 * v).collect();
        let (a, b) = (p0(&fr, xi), p0(&fr, &xi2));
        if (b - a * 2f64.powf(-t)).abs() > 1e-8 * a.abs() {
            return Err(Error::Invalid(format!("symbol not homogeneous of degree −{t}")));
        }
    }
    let pw = (n - 1) as f64 / t;
    let integral = if n == 2 {
        let f = |th: f64| {
            let fr = surface.frame_at([th, 0.0]);
            (p0(&fr, &[1.0]).abs().powf(pw) + p0(&fr, &[-1.0]).abs().powf(pw)) * surface.measure_weight([th, 0.0])
        };
        adaptive_panels(&f, dom[0].0, dom[0].1, tol, 8)?
    } else {
        let inner = |t: [f64; 2]| {
            let fr = surface.frame_at(t);
            let g = |w: f64| {
                let (s, c) = w.sin_cos();
                p0(&fr, &[c, s]).abs().powf(pw)
            };
            periodic_trapezoid(&g, 2.0 * PI, 64, tol).unwrap_or(f64::NAN) * surface.measure_weight(t)
        };
        let row = |phi: f64| adaptive_panels(&|th| inner([phi, th]), dom[1].0, dom[1].1, 0.1 * tol, 2).unwrap_or(f64::NAN);
        adaptive_panels(&row, dom[0].0, dom[0].1, tol, 2)?
    };
    let c = integral / ((n - 1) as f64 * (2.0 * PI).powi(n as i32 - 1));
    if !c.is_finite() {
        return Err(Error::NoConvergence("constant quadrature".into()));
    }
    Ok(c)
}

/// Law for the resolvent difference of `kind`, built from its principal symbol.
pub fn predict(kind: Kind, surface: &Hypersurface, coeffs: &CoefficientField, strength: &Strength, tol: f64) -> Result<AsymptoticLaw> {
    let n = surface.dim();
    coeffs.check_ellipticity(surface, 64)?;
    let vanishes = strength.vanishes();
    if kind.uses_beta() && vanishes {
        return Err(Error::Invalid("beta required and non-zero".into()));
    }
    let t = kind.order();
    let tol = if kind.uses_alpha() && vanishes { tol.max(1e-8) } else { tol };
    let p0 = |fr: &BoundaryFrame, xi: &[f64]| {
        transform_to_frame(coeffs, fr)
            .and_then(|l| kappa(&l, xi))
            .and_then(|s| operator_principal_symbol(kind, &s, strength.eval(fr)))
            .unwrap_or(f64::NAN)
    };
    let c_prime = seeley_constant(&p0, t, surface, tol)?;
    let exponent = t / (n - 1) as f64;
    let remainder = if kind.uses_alpha() && vanishes { RemainderClass::LittleO } else { RemainderClass::BigOOneBetter };
    Ok(AsymptoticLaw { kind, n, order: t, exponent, c_prime, constant: c_prime.powf(exponent), remainder })
}

/// (C′, C) for −Δ with constant strength, evaluated in closed form.
pub fn laplacian_closed_form(kind: Kind, surface: &Hypersurface, coeffs: &CoefficientField, strength: f64) -> Result<(f64, f64)> {
    if !coeffs.is_laplacian() {
        return Err(Error::Invalid("closed form needs the Laplacian".into()));
    }
    let n = surface.dim();
    let nm1 = (n - 1) as f64;
    let sphere_measure = if n == 2 { 2.0 } else { 2.0 * PI };
    let pre = surface.area() * sphere_measure / (nm1 * (2.0 * PI).powf(nm1));
    let t = kind.order();
    let sym = match kind {
        Kind::DeltaVsFree => strength.abs() / 4.0,
        Kind::DeltaPrimeVsFree | Kind::NeumannVsFree => 0.5,
        Kind::DeltaPrimeVsNeumann => {
            if strength == 0.0 {
                return Err(Error::Invalid("beta required and non-zero".into()));
            }
            1.0 / strength.abs()
        }
    };
    let c_prime = pre * sym.powf(nm1 / t);
    Ok((c_prime, c_prime.powf(t / nm1)))
}
