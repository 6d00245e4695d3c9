use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{mode_scalars, mode_table, ModeScalars, Radial, Run, SingularSpectrum, SpectrumMeta};
use crate::{Error, Kind, Result};

const DELTA_PRIME_GAP: f64 = 1e-8;

/// Singular value of the per-mode scalar operator.
///
/// - δ vs free: r_γ|α| / ((P − α)P)
/// - δ′ vs Neumann: r_ν / |β − Q|
/// - δ′ vs free: r_ν|β| / (Q|β − Q|)
/// - Neumann vs free: r_ν / Q
pub fn per_mode_value(kind: Kind, s: &ModeScalars, strength: f64) -> f64 {
    let (p, q) = (s.p_sum(), s.q_sum());
    match kind {
        Kind::DeltaVsFree => s.r_gamma * strength.abs() / ((p - strength) * p),
        Kind::DeltaPrimeVsNeumann => s.r_nu / (strength - q).abs(),
        Kind::DeltaPrimeVsFree => s.r_nu * strength.abs() / (q * (strength - q).abs()),
        Kind::NeumannVsFree => s.r_nu / q,
    }
}

/// Smallest m₀ with f(m₀) = target for f increasing in m₀, by bisection in log m₀.
fn solve_shift(f: &dyn Fn(f64) -> Option<f64>, target: f64, increasing: bool) -> Option<f64> {
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e8f64.ln());
    let side = |m: f64| f(m.exp()).map(|v| (v > target) == increasing);
    if side(lo)? || !side(hi)? {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if side(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi.exp())
}

fn beta_missing() -> Error {
    Error::Invalid(String::from("beta required and non-zero"))
}

/// Check that 0 stays in the resolvent set for every mode.
///
/// δ needs P_k − α > 0; P_k grows with k, so mode 0 is the binding one.
/// δ′ needs |β − Q_k| > 1e-8; Q_k falls to 0, so modes are scanned past the
/// point where Q_k < β/2 when β > 0.
pub fn check_admissible(kind: Kind, geom: &Radial, m0: f64, strength: f64, table: &[ModeScalars]) -> Result<()> {
    match kind {
        Kind::DeltaVsFree => {
            if let Some(s) = table.iter().find(|s| !(s.p_sum() - strength > 0.0)) {
                let shift = solve_shift(&|m| mode_scalars(geom, m, 0).ok().map(|s| s.p_sum()), strength, true);
                return Err(Error::Admissibility {
                    mode: s.mode,
                    reason: format!("p+ + p- - alpha = {:e} is not positive", s.p_sum() - strength),
                    min_shift: shift,
                });
            }
        }
        Kind::DeltaPrimeVsFree | Kind::DeltaPrimeVsNeumann => {
            if strength == 0.0 {
                return Err(beta_missing());
            }
            let fail = |s: &ModeScalars| (strength - s.q_sum()).abs() <= DELTA_PRIME_GAP;
            let mut bad = table.iter().find(|s| fail(s)).map(|s| (s.mode, s.q_sum()));
            if bad.is_none() && strength > 0.0 {
                let mut k = table.len();
                while let Some(s) = table.last().filter(|s| s.q_sum() >= 0.5 * strength).map(|_| mode_scalars(geom, m0, k)) {
                    let s = s?;
                    if fail(&s) {
                        bad = Some((k, s.q_sum()));
                        break;
                    }
                    if s.q_sum() < 0.5 * strength || k > 50_000_000 {
                        break;
                    }
                    k += 1;
                }
            }
            if let Some((mode, q)) = bad {
                let shift = solve_shift(&|m| mode_scalars(geom, m, 0).ok().map(|s| -s.q_sum()), -strength, true);
                return Err(Error::Admissibility {
                    mode,
                    reason: format!("beta - (q+ + q-) = {:e} is within {DELTA_PRIME_GAP:e} of 0", strength - q),
                    min_shift: if strength > 0.0 { shift } else { None },
                });
            }
        }
        Kind::NeumannVsFree => {}
    }
    Ok(())
}

/// Singular values of the resolvent difference for constant strength on
/// modes 0..=cutoff. `strength` is α for δ, β for the δ′ kinds and ignored otherwise.
pub fn krein_singular_values(kind: Kind, geom: &Radial, m0: f64, strength: f64, cutoff: usize) -> Result<SingularSpectrum> {
    let table = mode_table(geom, m0, cutoff)?;
    check_admissible(kind, geom, m0, strength, &table)?;
    let value = |s: &ModeScalars| Run { value: per_mode_value(kind, s, strength), mode: Some(s.mode), mult: s.multiplicity };
    #[cfg(feature = "parallel")]
    let runs: Vec<Run> = {
        use rayon::prelude::*;
        table.par_iter().map(value).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Run> = table.iter().map(value).collect();
    let meta = SpectrumMeta {
        kind: Some(kind),
        n: geom.n(),
        geometry: String::from(geom.name()),
        r: geom.r(),
        m0,
        strength: vec![strength],
        cutoff,
    };
    Ok(SingularSpectrum::from_runs(runs, meta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPsiResidual {
    pub phi: f64,
    pub psi: f64,
    pub det_phi: f64,
    pub det_psi: f64,
}

type M2 = [[f64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn residual(a: &M2, b: &M2) -> f64 {
    let p = mul(a, b);
    let mut r: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = if i == j { 1.0 } else { 0.0 };
            r = r.max((p[i][j] - e).abs());
        }
    }
    r
}

/// max |Φ Φ⁻¹ − I| and max |Ψ Ψ⁻¹ − I| for the per-mode 2×2 matrices
/// Φ = [[1, −1], [p⁺ − α, p⁻]] and Ψ = [[q⁺ − β, −q⁻], [1, 1]], with
/// Φ⁻¹ = (P − α)⁻¹ [[p⁻, 1], [α − p⁺, 1]] and Ψ⁻¹ = (Q − β)⁻¹ [[1, q⁻], [−1, q⁺ − β]].
pub fn verify_phi_psi_inverse(s: &ModeScalars, alpha: f64, beta: f64) -> Result<PhiPsiResidual> {
    let (pp, pm, qp, qm) = (s.p_plus, s.p_minus, s.q_plus, s.q_minus);
    let phi = [[1.0, -1.0], [pp - alpha, pm]];
    let psi = [[qp - beta, -qm], [1.0, 1.0]];
    let det_phi = s.p_sum() - alpha;
    let det_psi = s.q_sum() - beta;
    let scale_phi = 1.0 + pp.abs() + pm.abs() + alpha.abs();
    let scale_psi = 1.0 + qp.abs() + qm.abs() + beta.abs();
    if det_phi.abs() <= 1e-12 * scale_phi {
        return Err(Error::Admissibility {
            mode: s.mode,
            reason: format!("Phi is singular: det = {det_phi:e}"),
            min_shift: None,
        });
    }
    if det_psi.abs() <= 1e-12 * scale_psi {
        return Err(Error::Admissibility {
            mode: s.mode,
            reason: format!("Psi is singular: det = {det_psi:e}"),
            min_shift: None,
        });
    }
    let phi_inv = [[pm / det_phi, 1.0 / det_phi], [(alpha - pp) / det_phi, 1.0 / det_phi]];
    let psi_inv = [[1.0 / det_psi, qm / det_psi], [-1.0 / det_psi, (qp - beta) / det_psi]];
    Ok(PhiPsiResidual {
        phi: residual(&phi, &phi_inv).max(residual(&phi_inv, &phi)),
        psi: residual(&psi, &psi_inv).max(residual(&psi_inv, &psi)),
        det_phi,
        det_psi,
    })
}
