//! Property suite behind `kreinsv verify`.

use std::f64::consts::PI;

use kreinsv::bessel::{bessel_i, bessel_k, spherical_i, spherical_k};
use kreinsv::fd::{verify_adjoint_identity, RadialMesh, Trace};
use kreinsv::geometry::{transform_to_frame, CoefficientField, MatrixFamily};
use kreinsv::modes::{mode_scalars, verify_phi_psi_inverse, Radial};
use kreinsv::symbol::{dtn_ntd_principal, kappa, Side};

use crate::commands::Failure;
use crate::config::ExperimentConfig;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const INVERSE_TOL: f64 = 1e-12;
pub const MIN_ORDER: f64 = 1.8;

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub name: &'static str,
    pub passed: bool,
    /// Largest residual, or smallest observed order for order checks.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

fn residual_group(name: &'static str, worst: f64, tolerance: f64, detail: String) -> Group {
    Group { name, passed: worst <= tolerance, worst, tolerance, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn symbol_groups(cfg: &ExperimentConfig) -> Result<Vec<Group>, Failure> {
    let surface = cfg.surface();
    let n = cfg.n();
    let m0 = cfg.coefficients.m0;
    let fields = [
        cfg.coefficient_field()?,
        CoefficientField::new(n, MatrixFamily::Perturbed { eps: 0.1 }, 0.0, m0)?,
        CoefficientField::new(n, MatrixFamily::Perturbed { eps: 0.2 }, 0.0, m0)?,
    ];
    let [(a0, a1), (b0, b1)] = surface.domain();
    let (mut fact, mut inv, mut recip) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    for coeffs in &fields {
        for i in 0..16 {
            for j in 0..if n == 2 { 1 } else { 16 } {
                let t = [a0 + (a1 - a0) * (i as f64 + 0.5) / 16.0, b0 + (b1 - b0) * j as f64 / 16.0];
                let frame = surface.frame_at(t);
                let local = transform_to_frame(coeffs, &frame)?;
                for d in 0..6 {
                    let w = 0.3 + d as f64;
                    let xi: Vec<f64> = if n == 2 { vec![w.cos()] } else { vec![w.cos(), 0.7 * w.sin()] };
                    let s = kappa(&local, &xi)?;
                    for xn in [-3.0, -0.4, 0.0, 1.1, 7.5] {
                        let f = s.factored(xn);
                        let q = local.eval(&xi, xn);
                        fact = fact.max((f.re - q).abs().max(f.im.abs()) / q.abs());
                    }
                    inv = inv
                        .max((s.kappa_minus - s.kappa_plus.conj()).norm() / s.kappa_plus.norm())
                        .max(rel(s.kappa_plus.re, s.kappa0 / s.a_nn))
                        .max(rel(s.kappa_plus.norm_sqr(), s.c / s.a_nn));
                    if !(s.kappa0 > 0.0) {
                        inv = f64::INFINITY;
                    }
                    let (p, q) = dtn_ntd_principal(&s);
                    recip = recip.max((p * q - 1.0).abs());
                    count += 1;
                }
            }
        }
    }
    Ok(vec![
        residual_group("symbol_factorization", fact, IDENTITY_TOL, format!("{count} cotangent samples")),
        residual_group("kappa_invariants", inv, IDENTITY_TOL, format!("{count} cotangent samples")),
        residual_group("principal_reciprocity", recip, IDENTITY_TOL, format!("{count} cotangent samples")),
    ])
}

fn bessel_group() -> Result<Group, Failure> {
    let mut worst = 0.0f64;
    for k in 0..=100 {
        for x in [0.1, 0.5, 1.0, 2.0, 3.7, 10.0, 25.0, 50.0] {
            let (i, kk) = (bessel_i(k, x, true)?, bessel_k(k, x, true)?);
            worst = worst.max((x * (i.value * kk.derivative - i.derivative * kk.value) + 1.0).abs());
            let (i, kk) = (spherical_i(k, x, true)?, spherical_k(k, x, true)?);
            let w = x * x * (i.value * kk.derivative - i.derivative * kk.value);
            worst = worst.max((w / (PI / 2.0) + 1.0).abs());
        }
    }
    Ok(residual_group("bessel_wronskians", worst, IDENTITY_TOL, "orders 0..=100, 8 arguments".into()))
}

fn mode_groups(cfg: &ExperimentConfig) -> Result<Vec<Group>, Failure> {
    let geom = cfg.radial().unwrap_or(Radial::Disk { r: 1.0 });
    let m0 = cfg.coefficients.m0;
    let top = cfg.solver.mode_cutoff.min(500);
    let alpha = match (cfg.kind().uses_alpha(), cfg.constant_strength()) {
        (true, Some(a)) => a,
        _ => 1.0,
    };
    let beta = cfg.interaction.beta.unwrap_or(1.0);
    let (mut recip, mut phi, mut psi) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..=top {
        let s = mode_scalars(&geom, m0, k)?;
        recip = recip.max((s.p_minus * s.q_minus - 1.0).abs()).max((s.p_plus * s.q_plus - 1.0).abs());
        let r = verify_phi_psi_inverse(&s, alpha, beta)?;
        phi = phi.max(r.phi);
        psi = psi.max(r.psi);
    }
    let detail = format!("{} modes 0..={top}, alpha = {alpha}, beta = {beta}", geom.name());
    Ok(vec![
        residual_group("dtn_ntd_reciprocity", recip, IDENTITY_TOL, detail.clone()),
        residual_group("phi_inverse", phi, INVERSE_TOL, detail.clone()),
        residual_group("psi_inverse", psi, INVERSE_TOL, detail),
    ])
}

fn adjoint_groups(cfg: &ExperimentConfig) -> Result<Vec<Group>, Failure> {
    let geom = cfg.radial().unwrap_or(Radial::Disk { r: 1.0 });
    let m0 = cfg.coefficients.m0;
    let r = geom.r();
    let (mut balance, mut neumann, mut order) = (0.0f64, 0.0f64, f64::INFINITY);
    for mode in [0, 2] {
        for side in [Side::Minus, Side::Plus] {
            let near = match side {
                Side::Minus => Some((0.2 * r, 0.6 * r)),
                Side::Plus => Some((r + 0.5 / m0, r + 2.0 / m0)),
            };
            for support in [None, near] {
                let res = |h: f64| -> Result<_, Failure> {
                    let mesh = RadialMesh::with_step(&geom, m0, mode, h * r)?;
                    Ok((
                        verify_adjoint_identity(&mesh, Trace::Dirichlet, side, 11, support)?,
                        verify_adjoint_identity(&mesh, Trace::Neumann, side, 11, support)?,
                    ))
                };
                let (c, nc) = res(4e-3)?;
                let (f, nf) = res(2e-3)?;
                balance = balance.max(c.balance).max(f.balance);
                neumann = neumann.max(nc.stencil).max(nf.stencil);
                order = order.min((c.stencil / f.stencil).log2());
            }
        }
    }
    let detail = format!("{} modes 0 and 2, both sides, f global and compactly supported", geom.name());
    Ok(vec![
        residual_group("adjoint_dirichlet_balance", balance, IDENTITY_TOL, detail.clone()),
        Group { name: "adjoint_dirichlet_order", passed: order >= MIN_ORDER, worst: order, tolerance: MIN_ORDER, detail: detail.clone() },
        residual_group("adjoint_neumann", neumann, IDENTITY_TOL, detail),
    ])
}

pub fn suite(cfg: &ExperimentConfig) -> Result<Vec<Group>, Failure> {
    let mut out = symbol_groups(cfg)?;
    out.push(bessel_group()?);
    out.extend(mode_groups(cfg)?);
    out.extend(adjoint_groups(cfg)?);
    Ok(out)
}
