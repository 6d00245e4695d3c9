//! Per-mode boundary scalars for −Δ + m₀² on the disk/ball and its exterior,
//! and the singular values of the resolvent differences built from them.
//!
//! Trace functions are L²(Σ, dσ)-normalized Fourier modes (disk) or spherical
//! harmonics (ball), so every boundary operator is a scalar per mode.

mod galerkin;
mod krein;
mod spectrum;

pub use galerkin::{fourier_galerkin_singular_values, GalerkinBasis};
pub use krein::{
    check_admissible, krein_singular_values, per_mode_value, verify_phi_psi_inverse, PhiPsiResidual,
};
pub use spectrum::{Run, SingularSpectrum, SpectrumMeta};

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bessel::{i_ratio, i_ratios, k_ratios};
use crate::quadrature::adaptive;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radial {
    Disk { r: f64 },
    Ball { r: f64 },
}

impl Radial {
    pub fn n(&self) -> usize {
        match self {
            Radial::Disk { .. } => 2,
            Radial::Ball { .. } => 3,
        }
    }

    pub fn r(&self) -> f64 {
        match *self {
            Radial::Disk { r } | Radial::Ball { r } => r,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Radial::Disk { .. } => "disk",
            Radial::Ball { .. } => "ball",
        }
    }

    pub fn multiplicity(&self, mode: usize) -> usize {
        match self {
            Radial::Disk { .. } => {
                if mode == 0 {
                    1
                } else {
                    2
                }
            }
            Radial::Ball { .. } => 2 * mode + 1,
        }
    }

    fn half(&self) -> bool {
        matches!(self, Radial::Ball { .. })
    }

    fn validate(&self, m0: f64) -> Result<()> {
        let r = self.r();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Invalid(format!("radius {r} must be positive")));
        }
        if !(m0 > 0.0 && m0.is_finite()) {
            return Err(Error::Invalid(format!("shift m0 = {m0} must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeScalars {
    pub mode: usize,
    pub multiplicity: usize,
    /// Interior DtN value.
    pub p_minus: f64,
    /// Exterior DtN value.
    pub p_plus: f64,
    pub q_minus: f64,
    pub q_plus: f64,
    /// ‖K_γ φ‖² over Ω₋ and Ω₊ for a unit trace φ.
    pub r_gamma_sides: [f64; 2],
    pub r_gamma: f64,
    pub r_nu: f64,
}

impl ModeScalars {
    /// P = p⁺ + p⁻.
    pub fn p_sum(&self) -> f64 {
        self.p_plus + self.p_minus
    }

    /// Q = q⁺ + q⁻.
    pub fn q_sum(&self) -> f64 {
        self.q_plus + self.q_minus
    }
}

/// Assemble one mode from the Bessel ratios a = Z_{ν−1}/Z_ν, b = Z_{ν+1}/Z_ν
/// (interior Z = I or i) and c, d (exterior Z = K or k).
///
/// The squared Poisson norms come from the Lommel integral
/// ∫_0^R Z_ν(mr)² r dr = (R²/2)(Z_ν² − Z_{ν−1}Z_{ν+1}) for Z = I and its sign-flipped analogue for K.
fn assemble(geom: &Radial, m0: f64, mode: usize, [a, b, c, d]: [f64; 4]) -> ModeScalars {
    let r = geom.r();
    let x = m0 * r;
    let k = mode as f64;
    let p_minus = m0 * (k / x + b);
    let p_plus = m0 * (d - k / x);
    let (q_minus, q_plus) = (1.0 / p_minus, 1.0 / p_plus);
    let rg_minus = 0.5 * r * (1.0 - a * b);
    let rg_plus = 0.5 * r * (c * d - 1.0);
    ModeScalars {
        mode,
        multiplicity: geom.multiplicity(mode),
        p_minus,
        p_plus,
        q_minus,
        q_plus,
        r_gamma_sides: [rg_minus, rg_plus],
        r_gamma: rg_minus + rg_plus,
        r_nu: q_minus * q_minus * rg_minus + q_plus * q_plus * rg_plus,
    }
}

fn lower_i(geom: &Radial, x: f64, b0: f64) -> f64 {
    // Z_{−1}/Z_0: I_{−1} = I_1 for the disk, i_{−1} = cosh x / x for the ball.
    if geom.half() {
        1.0 / x.tanh()
    } else {
        b0
    }
}

fn lower_k(geom: &Radial, d0: f64) -> f64 {
    // K_{−1} = K_1 for the disk, k_{−1} = k_0 for the ball.
    if geom.half() {
        1.0
    } else {
        d0
    }
}

pub fn mode_scalars(geom: &Radial, m0: f64, mode: usize) -> Result<ModeScalars> {
    geom.validate(m0)?;
    let x = m0 * geom.r();
    let b = i_ratio(mode, x, geom.half())?;
    let a = if mode == 0 { lower_i(geom, x, b) } else { 1.0 / i_ratio(mode - 1, x, geom.half())? };
    let ks = k_ratios(mode, x, geom.half());
    let d = ks[mode];
    let c = if mode == 0 { lower_k(geom, d) } else { 1.0 / ks[mode - 1] };
    Ok(assemble(geom, m0, mode, [a, b, c, d]))
}

/// All modes 0..=kmax from one backward and one forward ratio sweep.
pub fn mode_table(geom: &Radial, m0: f64, kmax: usize) -> Result<Vec<ModeScalars>> {
    geom.validate(m0)?;
    let x = m0 * geom.r();
    let ib = i_ratios(kmax, x, geom.half());
    let kd = k_ratios(kmax, x, geom.half());
    let out: Vec<ModeScalars> = (0..=kmax)
        .map(|k| {
            let a = if k == 0 { lower_i(geom, x, ib[0]) } else { 1.0 / ib[k - 1] };
            let c = if k == 0 { lower_k(geom, kd[0]) } else { 1.0 / kd[k - 1] };
            assemble(geom, m0, k, [a, ib[k], c, kd[k]])
        })
        .collect();
    if let Some(bad) = out.iter().find(|s| !(s.p_minus > 0.0 && s.p_plus > 0.0 && s.r_gamma > 0.0 && s.r_nu > 0.0)) {
        return Err(Error::NoConvergence(format!("non-positive mode scalars at mode {}", bad.mode)));
    }
    Ok(out)
}

/// Squared Poisson norms [r_γ⁻, r_γ⁺] by radial quadrature: the interior on
/// [0, R], the exterior on [R, R + 30/m₀] with the tail completed from
/// K_ν(x) ~ √(π/2x) e^{−x}. A check on the closed form used by [`mode_scalars`].
pub fn poisson_norms_quadrature(geom: &Radial, m0: f64, mode: usize, tol: f64) -> Result<[f64; 2]> {
    use crate::bessel::{bessel_i, bessel_k, spherical_i, spherical_k};
    geom.validate(m0)?;
    let r = geom.r();
    let x = m0 * r;
    let n1 = (geom.n() - 1) as i32;
    let zi = |y: f64| {
        if geom.half() {
            spherical_i(mode, y, true).map(|v| v.value)
        } else {
            bessel_i(mode, y, true).map(|v| v.value)
        }
    };
    let zk = |y: f64| {
        if geom.half() {
            spherical_k(mode, y, true).map(|v| v.value)
        } else {
            bessel_k(mode, y, true).map(|v| v.value)
        }
    };
    let (i_r, k_r) = (zi(x)?, zk(x)?);
    let inner = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        match zi(m0 * s) {
            Ok(v) => (v / i_r * (m0 * (s - r)).exp()).powi(2) * s.powi(n1),
            Err(_) => 0.0,
        }
    };
    let outer = |s: f64| match zk(m0 * s) {
        Ok(v) => (v / k_r * (-m0 * (s - r)).exp()).powi(2) * s.powi(n1),
        Err(_) => f64::NAN,
    };
    let rt = r + 30.0 / m0;
    let interior = adaptive(&inner, 0.0, r, tol)?;
    let body = adaptive(&outer, r, rt, tol)?;
    let tail = outer(rt) / (2.0 * m0);
    let norm = r.powi(n1);
    Ok([interior / norm, (body + tail) / norm])
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: Radial = Radial::Disk { r: 1.0 };
    const BALL: Radial = Radial::Ball { r: 1.0 };

    #[test]
    fn documented_disk_values() {
        let s0 = mode_scalars(&DISK, 1.0, 0).unwrap();
        assert!((s0.p_minus - 0.4463899658965345).abs() < 1e-13);
        assert!((s0.p_plus - 1.4296253982604017).abs() < 1e-13);
        assert!((s0.p_minus - 0.446391).abs() < 1e-5);
        assert!((s0.p_plus - 1.429625).abs() < 1e-5);
        let s1 = mode_scalars(&DISK, 1.0, 1).unwrap();
        assert!((s1.p_minus - 1.2401937238700897).abs() < 1e-13);
        let s = mode_scalars(&DISK, 1.0, 2000).unwrap();
        assert!((s.p_minus / 2000.0 - 1.0).abs() < 2e-3);
        assert!((s.p_plus / 2000.0 - 1.0).abs() < 2e-3);
    }

    #[test]
    fn ball_values() {
        let s0 = mode_scalars(&BALL, 1.0, 0).unwrap();
        // −k₀′/k₀ = 1 + 1/x and i₀′/i₀ = coth x − 1/x
        assert!((s0.p_plus - 2.0).abs() < 1e-14);
        assert!((s0.p_minus - (1.0 / 1f64.tanh() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn table_matches_single_modes() {
        for geom in [DISK, BALL, Radial::Disk { r: 2.5 }, Radial::Ball { r: 0.3 }] {
            for m0 in [0.2, 1.0, 7.0] {
                let t = mode_table(&geom, m0, 400).unwrap();
                for k in [0usize, 1, 2, 17, 399, 400] {
                    let s = mode_scalars(&geom, m0, k).unwrap();
                    let e = &t[k];
                    for (u, v) in [(s.p_minus, e.p_minus), (s.p_plus, e.p_plus), (s.r_gamma, e.r_gamma), (s.r_nu, e.r_nu)] {
                        assert!(((u - v) / v).abs() < 1e-12, "{geom:?} m0={m0} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn positivity_and_reciprocity() {
        for geom in [DISK, BALL] {
            for s in mode_table(&geom, 1.0, 2000).unwrap() {
                assert!(s.p_minus > 0.0 && s.p_plus > 0.0 && s.r_gamma > 0.0 && s.r_nu > 0.0);
                assert_eq!(s.q_minus, 1.0 / s.p_minus);
                assert!((s.q_plus * s.p_plus - 1.0).abs() <= f64::EPSILON);
            }
        }
    }

    #[test]
    fn large_mode_limits() {
        for geom in [DISK, BALL, Radial::Disk { r: 1.7 }] {
            let r = geom.r();
            let t = mode_table(&geom, 1.0, 4000).unwrap();
            let err = |k: usize| {
                let s = &t[k];
                let kf = k as f64;
                [
                    (s.p_minus * r / kf - 1.0).abs(),
                    (s.p_plus * r / kf - 1.0).abs(),
                    (s.r_gamma * kf / r - 1.0).abs(),
                    (s.r_nu * (kf / r).powi(3) - 1.0).abs(),
                ]
            };
            let (e1, e2) = (err(1000), err(4000));
            for i in 0..4 {
                assert!(e2[i] < 2e-3, "{geom:?} {i}: {}", e2[i]);
                // at least O(1/k): quadrupling k cuts the error by 4 or more
                assert!(e1[i] / e2[i] > 3.5, "{geom:?} {i}: {}", e1[i] / e2[i]);
            }
        }
    }

    #[test]
    fn closed_form_norms_match_quadrature() {
        for geom in [DISK, BALL, Radial::Disk { r: 0.6 }] {
            for m0 in [0.5, 1.0, 3.0] {
                for k in [0usize, 1, 2, 5, 10, 40] {
                    let q = poisson_norms_quadrature(&geom, m0, k, 1e-13).unwrap();
                    let s = mode_scalars(&geom, m0, k).unwrap();
                    for side in 0..2 {
                        let (u, v) = (q[side], s.r_gamma_sides[side]);
                        assert!(((u - v) / v).abs() < 1e-10, "{geom:?} m0={m0} k={k} side={side}: {u} {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(mode_scalars(&DISK, 0.0, 0).is_err());
        assert!(mode_table(&Radial::Ball { r: -1.0 }, 1.0, 3).is_err());
    }
}
