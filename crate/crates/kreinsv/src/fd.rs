//! Finite-volume radial oracle for the per-mode problems.
//!
//! Nodes sit at r_i = i·h inside and R + i·h outside; each node owns the
//! shell between its neighbouring midpoints, so the discrete operators are
//! symmetric tridiagonal matrices in the r^{n−1}-weighted inner product.
//! The exterior is cut at R_out with a homogeneous Dirichlet condition.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use crate::modes::{mode_scalars, per_mode_value, Radial};
use crate::symbol::Side;
use crate::{Error, Kind, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMesh {
    pub n: usize,
    pub mode: usize,
    pub r: f64,
    pub r_out: f64,
    pub h: f64,
    pub m0: f64,
    /// Interior nodes, the interface node included.
    pub interior: usize,
    /// Exterior nodes, the interface node included.
    pub exterior: usize,
}

impl RadialMesh {
    /// `h` is rounded so that R/h is an integer.
    pub fn new(geom: &Radial, m0: f64, mode: usize, h: f64, r_out: f64) -> Result<Self> {
        let r = geom.r();
        if !(r > 0.0 && m0 > 0.0 && h > 0.0 && h < r) {
            return Err(Error::Invalid(format!("bad mesh: R = {r}, m0 = {m0}, h = {h}")));
        }
        if !(r_out >= r + 20.0 / m0) {
            return Err(Error::Invalid(format!("R_out = {r_out} must be at least R + 20/m0 = {}", r + 20.0 / m0)));
        }
        let cells = (r / h).round() as usize;
        let h = r / cells as f64;
        let exterior = ((r_out - r) / h).ceil() as usize;
        let interior = if mode == 0 { cells + 1 } else { cells };
        Ok(RadialMesh { n: geom.n(), mode, r, r_out: r + exterior as f64 * h, h, m0, interior, exterior })
    }

    /// Mesh with the default truncation R + 20/m₀.
    pub fn with_step(geom: &Radial, m0: f64, mode: usize, h: f64) -> Result<Self> {
        Self::new(geom, m0, mode, h, geom.r() + 20.0 / m0)
    }

    fn first(&self) -> usize {
        if self.mode == 0 {
            0
        } else {
            1
        }
    }

    pub fn interior_nodes(&self) -> Vec<f64> {
        (self.first()..self.first() + self.interior).map(|i| i as f64 * self.h).collect()
    }

    pub fn exterior_nodes(&self) -> Vec<f64> {
        (0..self.exterior).map(|i| self.r + i as f64 * self.h).collect()
    }

    fn mu(&self) -> f64 {
        let k = self.mode as f64;
        if self.n == 2 {
            k * k
        } else {
            k * (k + 1.0)
        }
    }

    fn sigma(&self, r: f64) -> f64 {
        r.powi(self.n as i32 - 1) / self.h
    }

    fn volume(&self, a: f64, b: f64) -> f64 {
        let n = self.n as i32;
        (b.powi(n) - a.powi(n)) / self.n as f64
    }

    fn assemble(&self) -> Blocks {
        let h = self.h;
        let c = |r: f64| if r > 0.0 { self.mu() / (r * r) } else { 0.0 } + self.m0 * self.m0;
        let ri = self.interior_nodes();
        let mut inner = Block::new(ri.len());
        for (i, &r) in ri.iter().enumerate() {
            inner.v[i] = self.volume((r - 0.5 * h).max(0.0), (r + 0.5 * h).min(self.r));
            inner.d[i] = c(r) * inner.v[i];
        }
        for i in 0..ri.len() - 1 {
            let s = self.sigma(ri[i] + 0.5 * h);
            inner.d[i] += s;
            inner.d[i + 1] += s;
            inner.o[i] = -s;
        }
        if self.mode > 0 {
            inner.d[0] += self.sigma(0.5 * h);
        }
        let re = self.exterior_nodes();
        let mut outer = Block::new(re.len());
        for (i, &r) in re.iter().enumerate() {
            outer.v[i] = self.volume((r - 0.5 * h).max(self.r), r + 0.5 * h);
            outer.d[i] = c(r) * outer.v[i];
        }
        for i in 0..re.len() - 1 {
            let s = self.sigma(re[i] + 0.5 * h);
            outer.d[i] += s;
            outer.d[i + 1] += s;
            outer.o[i] = -s;
        }
        let last = re.len() - 1;
        outer.d[last] += self.sigma(re[last] + 0.5 * h);
        Blocks { inner, outer, area: self.r.powi(self.n as i32 - 1) }
    }
}

struct Block {
    d: Vec<f64>,
    o: Vec<f64>,
    v: Vec<f64>,
}

impl Block {
    fn new(len: usize) -> Self {
        Block { d: vec![0.0; len], o: vec![0.0; len.saturating_sub(1)], v: vec![0.0; len] }
    }
}

struct Blocks {
    inner: Block,
    outer: Block,
    area: f64,
}

/// Symmetric tridiagonal matrix; `o[i]` couples i and i + 1.
#[derive(Debug, Clone)]
struct Tri {
    d: Vec<f64>,
    o: Vec<f64>,
}

impl Tri {
    fn solve(&self, rhs: &[f64], what: &str) -> Result<Vec<f64>> {
        let n = self.d.len();
        let scale = self.d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut prev_c = 0.0;
        let mut prev_x = 0.0;
        for i in 0..n {
            let sub = if i > 0 { self.o[i - 1] } else { 0.0 };
            let piv = self.d[i] - sub * prev_c;
            if !(piv.abs() > 1e-14 * scale) {
                return Err(Error::Singular(format!("{what}: zero pivot at row {i}")));
            }
            c[i] = if i + 1 < n { self.o[i] / piv } else { 0.0 };
            x[i] = (rhs[i] - sub * prev_x) / piv;
            prev_c = c[i];
            prev_x = x[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(x)
    }
}

/// Realizations of −Δ + m₀² across the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Realization {
    Free,
    Delta(f64),
    Neumann,
    DeltaPrime(f64),
}

impl Realization {
    /// (perturbed, reference) pair for a resolvent difference.
    pub fn pair(kind: Kind, strength: f64) -> (Realization, Realization) {
        match kind {
            Kind::DeltaVsFree => (Realization::Delta(strength), Realization::Free),
            Kind::DeltaPrimeVsFree => (Realization::DeltaPrime(strength), Realization::Free),
            Kind::DeltaPrimeVsNeumann => (Realization::DeltaPrime(strength), Realization::Neumann),
            Kind::NeumannVsFree => (Realization::Neumann, Realization::Free),
        }
    }

    fn merged(&self) -> bool {
        matches!(self, Realization::Free | Realization::Delta(_))
    }
}

/// The discrete operator of one realization on the stacked unknowns
/// `[interior…, exterior…]`, where the interface value appears twice.
struct Discrete {
    tri: Tri,
    merged: bool,
    ni: usize,
    w: Vec<f64>,
}

impl Discrete {
    fn new(mesh: &RadialMesh, op: Realization) -> Result<Self> {
        let b = mesh.assemble();
        let ni = b.inner.d.len();
        let mut w = b.inner.v.clone();
        w.extend_from_slice(&b.outer.v);
        let tri = if op.merged() {
            let mut d = b.inner.d[..ni - 1].to_vec();
            d.push(b.inner.d[ni - 1] + b.outer.d[0]);
            d.extend_from_slice(&b.outer.d[1..]);
            let mut o = b.inner.o.clone();
            o.extend_from_slice(&b.outer.o);
            if let Realization::Delta(a) = op {
                d[ni - 1] -= b.area * a;
            }
            Tri { d, o }
        } else {
            let mut d = b.inner.d.clone();
            d.extend_from_slice(&b.outer.d);
            let mut o = b.inner.o.clone();
            o.push(0.0);
            o.extend_from_slice(&b.outer.o);
            if let Realization::DeltaPrime(beta) = op {
                if beta == 0.0 {
                    return Err(Error::Invalid(String::from("beta required and non-zero")));
                }
                let g = b.area / beta;
                d[ni - 1] -= g;
                d[ni] -= g;
                o[ni - 1] += g;
            }
            Tri { d, o }
        };
        Ok(Discrete { tri, merged: op.merged(), ni, w })
    }

    /// u = A⁻¹ W f on the stacked layout.
    fn resolve(&self, f: &[f64], what: &str) -> Result<Vec<f64>> {
        let ni = self.ni;
        let rhs: Vec<f64> = f.iter().zip(&self.w).map(|(f, w)| f * w).collect();
        if self.merged {
            let mut r = rhs[..ni - 1].to_vec();
            r.push(rhs[ni - 1] + rhs[ni]);
            r.extend_from_slice(&rhs[ni + 1..]);
            let u = self.tri.solve(&r, what)?;
            let mut out = u[..ni].to_vec();
            out.extend_from_slice(&u[ni - 1..]);
            Ok(out)
        } else {
            self.tri.solve(&rhs, what)
        }
    }
}

fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// Smooth pseudo-random test function on the stacked layout.
fn test_function(mesh: &RadialMesh, seed: u64, support: Option<(f64, f64)>) -> Vec<f64> {
    let mut rng = SmallRng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64)> =
        (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..4.0), rng.gen_range(0.0..6.3))).collect();
    let f = |r: f64| {
        let base: f64 = terms.iter().map(|(c, k, p)| c * (k * r + p).cos()).sum();
        let bump = match support {
            Some((a, b)) if r > a && r < b => {
                let t = (2.0 * r - a - b) / (b - a);
                (-1.0 / (1.0 - t * t)).exp()
            }
            Some(_) => 0.0,
            None => 1.0,
        };
        base * bump * (-(r - mesh.r).max(0.0)).exp()
    };
    let mut out: Vec<f64> = mesh.interior_nodes().into_iter().map(f).collect();
    out.extend(mesh.exterior_nodes().into_iter().map(f));
    out
}

/// Largest relative defect of ⟨g, A⁻¹f⟩_W = ⟨A⁻¹g, f⟩_W over a few random pairs.
pub fn resolvent_symmetry(mesh: &RadialMesh, op: Realization) -> Result<f64> {
    let a = Discrete::new(mesh, op)?;
    let mut worst: f64 = 0.0;
    for seed in 0..3 {
        let f = test_function(mesh, 2 * seed + 1, None);
        let g = test_function(mesh, 2 * seed + 2, None);
        let lhs = weighted_dot(&a.w, &g, &a.resolve(&f, "resolvent")?);
        let rhs = weighted_dot(&a.w, &a.resolve(&g, "resolvent")?, &f);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
    }
    Ok(worst)
}

/// Second-order one-sided DtN values (p⁻, p⁺) for u(R) = 1.
pub fn fd_dtn(mesh: &RadialMesh) -> Result<(f64, f64)> {
    let b = mesh.assemble();
    let h = mesh.h;
    let ni = b.inner.d.len();
    let inner = Tri { d: b.inner.d[..ni - 1].to_vec(), o: b.inner.o[..ni - 2].to_vec() };
    let mut rhs = vec![0.0; ni - 1];
    rhs[ni - 2] = -b.inner.o[ni - 2];
    let mut u = inner.solve(&rhs, "interior Dirichlet problem")?;
    u.push(1.0);
    let p_minus = (3.0 * u[ni - 1] - 4.0 * u[ni - 2] + u[ni - 3]) / (2.0 * h);
    let ne = b.outer.d.len();
    let outer = Tri { d: b.outer.d[1..].to_vec(), o: b.outer.o[1..].to_vec() };
    let mut rhs = vec![0.0; ne - 1];
    rhs[0] = -b.outer.o[0];
    let v = outer.solve(&rhs, "exterior Dirichlet problem")?;
    let p_plus = (3.0 - 4.0 * v[0] + v[1]) / (2.0 * h);
    Ok((p_minus, p_plus))
}

/// Largest singular value of the discrete resolvent difference for one mode,
/// by power iteration in the weighted inner product.
pub fn fd_resolvent_difference(kind: Kind, mesh: &RadialMesh, strength: f64) -> Result<f64> {
    let (one, zero) = Realization::pair(kind, strength);
    let a1 = Discrete::new(mesh, one)?;
    let a0 = Discrete::new(mesh, zero)?;
    let sq: Vec<f64> = a1.w.iter().map(|w| w.sqrt()).collect();
    let mut y: Vec<f64> = (0..sq.len()).map(|i| (0.37 * i as f64).cos() + 1.0).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ny = norm(&y);
    y.iter_mut().for_each(|x| *x /= ny);
    let mut lam = 0.0;
    for _ in 0..100 {
        let f: Vec<f64> = y.iter().zip(&sq).map(|(y, s)| y / s).collect();
        let u1 = a1.resolve(&f, "perturbed operator")?;
        let u0 = a0.resolve(&f, "reference operator")?;
        let z: Vec<f64> = u1.iter().zip(&u0).zip(&sq).map(|((a, b), s)| s * (a - b)).collect();
        let nz = norm(&z);
        if nz == 0.0 {
            return Ok(0.0);
        }
        y = z.into_iter().map(|x| x / nz).collect();
        if (nz - lam).abs() <= 1e-14 * nz {
            return Ok(nz);
        }
        lam = nz;
    }
    Ok(lam)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trace {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointResidual {
    /// Relative residual with the one-sided stencil for the conormal derivative.
    pub stencil: f64,
    /// Relative residual with the flux read off the discrete balance at the interface.
    pub balance: f64,
}

/// Compares (f, K φ) with −ν A_γ⁻¹ f · φ (Dirichlet) or γ A_ν⁻¹ f · φ
/// (Neumann) for a unit trace φ on one side. `support` restricts f to an annulus.
pub fn verify_adjoint_identity(
    mesh: &RadialMesh,
    trace: Trace,
    side: Side,
    seed: u64,
    support: Option<(f64, f64)>,
) -> Result<AdjointResidual> {
    let b = mesh.assemble();
    let h = mesh.h;
    let f_all = test_function(mesh, seed, support);
    let ni = b.inner.d.len();
    // reorder the side so that index 0 is the interface node
    let (blk, f): (Block, Vec<f64>) = match side {
        Side::Minus => {
            let mut d = b.inner.d.clone();
            let mut o = b.inner.o.clone();
            let mut v = b.inner.v.clone();
            d.reverse();
            o.reverse();
            v.reverse();
            (Block { d, o, v }, f_all[..ni].iter().rev().copied().collect())
        }
        Side::Plus => (b.outer, f_all[ni..].to_vec()),
    };
    let len = blk.d.len();
    let vf: Vec<f64> = blk.v.iter().zip(&f).map(|(v, f)| v * f).collect();
    let rel = |a: f64, c: f64| (a - c).abs() / a.abs().max(c.abs()).max(f64::MIN_POSITIVE);
    match trace {
        Trace::Dirichlet => {
            let tri = Tri { d: blk.d[1..].to_vec(), o: blk.o[1..].to_vec() };
            let mut rhs = vec![0.0; len - 1];
            rhs[0] = -blk.o[0];
            let mut u = vec![1.0];
            u.extend(tri.solve(&rhs, "Poisson problem")?);
            let mut w = vec![0.0];
            w.extend(tri.solve(&vf[1..], "Dirichlet resolvent")?);
            let lhs: f64 = vf.iter().zip(&u).map(|(a, b)| a * b).sum();
            // derivative away from the interface, i.e. −ν w
            let away = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
            let stencil = b.area * away;
            let balance = -blk.o[0] * w[1] + vf[0];
            Ok(AdjointResidual { stencil: rel(lhs, stencil), balance: rel(lhs, balance) })
        }
        Trace::Neumann => {
            let tri = Tri { d: blk.d.clone(), o: blk.o.clone() };
            let mut rhs = vec![0.0; len];
            rhs[0] = b.area;
            let u = tri.solve(&rhs, "Poisson problem")?;
            let w = tri.solve(&vf, "Neumann resolvent")?;
            let lhs: f64 = vf.iter().zip(&u).map(|(a, b)| a * b).sum();
            let r = rel(lhs, b.area * w[0]);
            Ok(AdjointResidual { stencil: r, balance: r })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub value: f64,
    pub error: f64,
    /// log₂ of the error ratio to the previous row.
    pub order: Option<f64>,
}

/// FD values of one per-mode quantity against the closed form for a sequence of steps.
pub fn convergence_study(
    kind: Kind,
    geom: &Radial,
    m0: f64,
    mode: usize,
    strength: f64,
    steps: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    let exact = per_mode_value(kind, &mode_scalars(geom, m0, mode)?, strength);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(steps.len());
    for &h in steps {
        let mesh = RadialMesh::with_step(geom, m0, mode, h)?;
        let value = fd_resolvent_difference(kind, &mesh, strength)?;
        let error = value - exact;
        let order = rows.last().map(|p| (p.error / error).abs().log2() / (p.h / mesh.h).log2());
        rows.push(ConvergenceRow { h: mesh.h, value, error, order });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: Radial = Radial::Disk { r: 1.0 };
    const BALL: Radial = Radial::Ball { r: 1.0 };

    #[test]
    fn mesh_validation() {
        assert!(RadialMesh::new(&DISK, 1.0, 0, 1e-2, 15.0).is_err());
        let m = RadialMesh::new(&DISK, 1.0, 3, 0.01001, 21.0).unwrap();
        assert!((m.h - 0.01).abs() < 1e-17);
        assert_eq!(m.interior, 100);
        assert!(m.r_out >= 21.0);
        assert_eq!(m.interior_nodes()[0], 0.01);
    }

    #[test]
    fn dtn_second_order() {
        let s = mode_scalars(&DISK, 1.0, 0).unwrap();
        let err = |h: f64| {
            let (pm, pp) = fd_dtn(&RadialMesh::with_step(&DISK, 1.0, 0, h).unwrap()).unwrap();
            (pm - s.p_minus, pp - s.p_plus)
        };
        let (a, b) = (err(4e-3), err(2e-3));
        assert!(a.0.abs() < 1e-4 && a.1.abs() < 1e-4);
        assert!((a.0 / b.0).log2() > 1.8 && (a.1 / b.1).log2() > 1.8);
    }

    #[test]
    fn dtn_ball_degree_zero() {
        let (_, pp) = fd_dtn(&RadialMesh::with_step(&BALL, 1.0, 0, 1e-3).unwrap()).unwrap();
        assert!((pp - 2.0).abs() < 5e-4);
    }

    #[test]
    fn dtn_independent_of_truncation() {
        let a = fd_dtn(&RadialMesh::new(&DISK, 1.0, 2, 5e-3, 21.0).unwrap()).unwrap();
        let b = fd_dtn(&RadialMesh::new(&DISK, 1.0, 2, 5e-3, 41.0).unwrap()).unwrap();
        assert!((a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8);
    }

    #[test]
    fn zero_alpha_is_zero() {
        let m = RadialMesh::with_step(&DISK, 1.0, 1, 1e-2).unwrap();
        assert_eq!(fd_resolvent_difference(Kind::DeltaVsFree, &m, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn operators_are_symmetric() {
        for geom in [DISK, BALL] {
            for k in [0, 3] {
                let m = RadialMesh::with_step(&geom, 1.0, k, 1e-2).unwrap();
                for op in [Realization::Free, Realization::Delta(1.0), Realization::Neumann, Realization::DeltaPrime(1.0)] {
                    assert!(resolvent_symmetry(&m, op).unwrap() < 1e-12, "{op:?}");
                }
            }
        }
    }

    #[test]
    fn per_mode_values_converge() {
        for kind in Kind::ALL {
            for k in [0, 4] {
                let rows = convergence_study(kind, &DISK, 1.0, k, 1.0, &[4e-3, 2e-3]).unwrap();
                assert!(rows[1].error.abs() < 1e-3 * rows[1].value, "{kind:?} {k}");
                assert!(rows[1].order.unwrap() > 1.8, "{kind:?} {k} {:?}", rows);
            }
        }
    }

    #[test]
    fn singular_systems_are_reported() {
        let m = RadialMesh::with_step(&DISK, 1.0, 0, 0.1).unwrap();
        assert!(Discrete::new(&m, Realization::DeltaPrime(0.0)).is_err());
        let t = Tri { d: vec![1.0, 1.0], o: vec![1.0] };
        assert!(matches!(t.solve(&[1.0, 0.0], "test"), Err(Error::Singular(_))));
    }

    #[test]
    fn adjoint_identities() {
        for geom in [DISK, BALL] {
            for side in [Side::Minus, Side::Plus] {
                let support = match side {
                    Side::Minus => Some((0.2, 0.6)),
                    Side::Plus => Some((1.5, 3.0)),
                };
                for sup in [None, support] {
                    let r = |h: f64| {
                        let m = RadialMesh::with_step(&geom, 1.0, 2, h).unwrap();
                        verify_adjoint_identity(&m, Trace::Dirichlet, side, 7, sup).unwrap()
                    };
                    let (a, b) = (r(4e-3), r(2e-3));
                    assert!(a.balance < 1e-10 && b.balance < 1e-10);
                    assert!((a.stencil / b.stencil).log2() > 1.8, "{geom:?} {side:?} {sup:?} {a:?} {b:?}");
                    let m = RadialMesh::with_step(&geom, 1.0, 2, 4e-3).unwrap();
                    let n = verify_adjoint_identity(&m, Trace::Neumann, side, 7, sup).unwrap();
                    assert!(n.stencil < 1e-10);
                }
            }
        }
    }
}
