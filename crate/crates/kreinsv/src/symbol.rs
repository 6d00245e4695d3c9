//! Principal symbols at a boundary point: the factorization
//! a_nn ξ_n² + 2bξ_n + c = a_nn(κ₊ + iξ_n)(κ₋ − iξ_n) and the symbols built from it.

use alloc::format;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::LocalQuadraticData;
use crate::{Error, Result};

/// The resolvent differences handled by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    DeltaVsFree,
    DeltaPrimeVsFree,
    DeltaPrimeVsNeumann,
    NeumannVsFree,
}

impl Kind {
    pub const ALL: [Kind; 4] = [
        Kind::DeltaVsFree,
        Kind::DeltaPrimeVsFree,
        Kind::DeltaPrimeVsNeumann,
        Kind::NeumannVsFree,
    ];

    /// t such that the difference is a ψdo of order −t on Σ.
    pub fn order(self) -> f64 {
        match self {
            Kind::DeltaVsFree | Kind::DeltaPrimeVsNeumann => 3.0,
            Kind::DeltaPrimeVsFree | Kind::NeumannVsFree => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::DeltaVsFree => "delta_vs_free",
            Kind::DeltaPrimeVsFree => "deltaprime_vs_free",
            Kind::DeltaPrimeVsNeumann => "deltaprime_vs_neumann",
            Kind::NeumannVsFree => "neumann_vs_free",
        }
    }

    pub fn from_name(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn uses_alpha(self) -> bool {
        self == Kind::DeltaVsFree
    }

    pub fn uses_beta(self) -> bool {
        matches!(self, Kind::DeltaPrimeVsFree | Kind::DeltaPrimeVsNeumann)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSymbolData {
    pub a_nn: f64,
    pub b: f64,
    pub c: f64,
    pub kappa0: f64,
    pub kappa_plus: Complex64,
    pub kappa_minus: Complex64,
}

pub fn kappa(local: &LocalQuadraticData, xi: &[f64]) -> Result<LocalSymbolData> {
    if xi.len() != local.n - 1 || xi.iter().all(|v| *v == 0.0) {
        return Err(Error::Invalid(format!("cotangent vector {xi:?} must be non-zero of length {}", local.n - 1)));
    }
    let a_nn = local.a_nn;
    let b = local.b_at(xi);
    let c = local.c_at(xi);
    let d = a_nn * c - b * b;
    if !(d > 1e-14 * a_nn * c) {
        return Err(Error::Ellipticity(format!("a_nn c − b² = {d:e} at ξ′ = {xi:?}")));
    }
    let kappa0 = d.sqrt();
    let kappa_plus = Complex64::new(kappa0 / a_nn, b / a_nn);
    Ok(LocalSymbolData { a_nn, b, c, kappa0, kappa_plus, kappa_minus: kappa_plus.conj() })
}

impl LocalSymbolData {
    /// a_nn(κ₊ + iξ_n)(κ₋ − iξ_n); equals the quadratic form at (ξ′, ξ_n).
    pub fn factored(&self, xi_n: f64) -> Complex64 {
        let i = Complex64::i();
        (self.kappa_plus + i * xi_n) * (self.kappa_minus - i * xi_n) * self.a_nn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Principal Poisson kernels in the normal variable: e^{−κx_n} for Dirichlet
/// data and e^{−κx_n}/κ₀ for Neumann data, κ = κ₊ or κ₋ by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonKernels {
    pub kappa: Complex64,
    pub kappa0: f64,
}

impl PoissonKernels {
    pub fn dirichlet(&self, x_n: f64) -> Complex64 {
        (-self.kappa * x_n).exp()
    }

    pub fn neumann(&self, x_n: f64) -> Complex64 {
        self.dirichlet(x_n) / self.kappa0
    }
}

pub fn poisson_principal_kernels(sym: &LocalSymbolData, side: Side) -> PoissonKernels {
    let kappa = match side {
        Side::Plus => sym.kappa_plus,
        Side::Minus => sym.kappa_minus,
    };
    PoissonKernels { kappa, kappa0: sym.kappa0 }
}

/// (DtN, NtD) principal symbols on either side: (κ₀, 1/κ₀).
pub fn dtn_ntd_principal(sym: &LocalSymbolData) -> (f64, f64) {
    (sym.kappa0, 1.0 / sym.kappa0)
}

/// One-sided K*K compositions for Dirichlet and Neumann Poisson operators.
pub fn composition_principal(sym: &LocalSymbolData) -> (f64, f64) {
    let k = sym.kappa0;
    (sym.a_nn / (2.0 * k), sym.a_nn / (2.0 * k * k * k))
}

/// Principal symbol of the resolvent difference, both sides summed.
/// `strength` is α for the δ kind and β for the δ′ kinds.
pub fn operator_principal_symbol(kind: Kind, sym: &LocalSymbolData, strength: f64) -> Result<f64> {
    let (a, k) = (sym.a_nn, sym.kappa0);
    Ok(match kind {
        Kind::DeltaVsFree => a * strength / (4.0 * k * k * k),
        Kind::DeltaPrimeVsFree | Kind::NeumannVsFree => a / (2.0 * k * k),
        Kind::DeltaPrimeVsNeumann => {
            if strength == 0.0 {
                return Err(Error::Invalid("beta required and non-zero".into()));
            }
            a / (strength * k * k * k)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    fn laplace(n: usize) -> LocalQuadraticData {
        LocalQuadraticData { n, a_nn: 1.0, b: [0.0; 2], c: [[1.0, 0.0], [0.0, 1.0]] }
    }

    fn random_local(rng: &mut SmallRng) -> LocalQuadraticData {
        // SPD 3×3 via G Gᵀ + I/4 read in a frame aligned with the axes.
        let g: [[f64; 3]; 3] = core::array::from_fn(|_| core::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let a = |i: usize, j: usize| (0..3).map(|k| g[i][k] * g[j][k]).sum::<f64>() + if i == j { 0.25 } else { 0.0 };
        LocalQuadraticData { n: 3, a_nn: a(2, 2), b: [a(0, 2), a(1, 2)], c: [[a(0, 0), a(0, 1)], [a(1, 0), a(1, 1)]] }
    }

    #[test]
    fn laplacian_kappa() {
        for xi in [[1.0, 0.0], [0.6, 0.8], [3.0, -4.0]] {
            let s = kappa(&laplace(3), &xi).unwrap();
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            assert!((s.kappa0 - r).abs() < 1e-15 * r);
            assert!((s.kappa_plus - r).norm() < 1e-15 * r);
            assert!((s.kappa_minus - r).norm() < 1e-15 * r);
        }
    }

    #[test]
    fn scaled_identity() {
        let mu = 2.5;
        let l = LocalQuadraticData { n: 2, a_nn: mu, b: [0.0; 2], c: [[mu, 0.0], [0.0, 0.0]] };
        let s = kappa(&l, &[2.0]).unwrap();
        assert!((s.kappa0 - mu * 2.0).abs() < 1e-14);
        assert!((s.kappa_plus.re - 2.0).abs() < 1e-14 && s.kappa_plus.im == 0.0);
    }

    #[test]
    fn diag_one_four() {
        let l = LocalQuadraticData { n: 2, a_nn: 4.0, b: [0.0; 2], c: [[1.0, 0.0], [0.0, 0.0]] };
        let s = kappa(&l, &[1.0]).unwrap();
        assert_eq!(s.kappa0, 2.0);
        assert_eq!(s.kappa_plus, Complex64::new(0.5, 0.0));
        assert_eq!(dtn_ntd_principal(&s), (2.0, 0.5));
        assert_eq!(composition_principal(&s), (1.0, 0.25));
    }

    #[test]
    fn rejects_zero_and_degenerate() {
        assert!(kappa(&laplace(3), &[0.0, 0.0]).is_err());
        let l = LocalQuadraticData { n: 2, a_nn: 1.0, b: [1.0, 0.0], c: [[1.0, 0.0], [0.0, 0.0]] };
        assert!(matches!(kappa(&l, &[1.0]), Err(Error::Ellipticity(_))));
    }

    #[test]
    fn factorization_identity() {
        let mut rng = SmallRng::seed_from_u64(17);
        for _ in 0..100 {
            let l = random_local(&mut rng);
            let xi = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let xn = rng.gen_range(-5.0..5.0);
            let s = kappa(&l, &xi).unwrap();
            let q = l.eval(&xi, xn);
            let f = s.factored(xn);
            assert!((f - q).norm() <= 1e-10 * q.abs(), "{f} vs {q}");
        }
    }

    #[test]
    fn kappa_invariants() {
        let mut rng = SmallRng::seed_from_u64(23);
        for _ in 0..200 {
            let l = random_local(&mut rng);
            let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let s = kappa(&l, &xi).unwrap();
            assert_eq!(s.kappa_minus, s.kappa_plus.conj());
            assert!(s.kappa0 > 0.0);
            assert!((s.kappa_plus.re - s.kappa0 / s.a_nn).abs() <= 1e-12 * s.kappa_plus.re);
            assert!(s.kappa_plus.re > 0.0);
            assert!((s.kappa_plus.norm_sqr() - s.c / s.a_nn).abs() <= 1e-10 * s.c / s.a_nn);
            let t = rng.gen_range(0.1..10.0);
            let st = kappa(&l, &[t * xi[0], t * xi[1]]).unwrap();
            assert!((st.kappa0 - t * s.kappa0).abs() <= 1e-12 * st.kappa0);
            assert!((st.kappa_plus - s.kappa_plus * t).norm() <= 1e-12 * st.kappa_plus.norm());
            let (p, q) = dtn_ntd_principal(&s);
            assert!((p * q - 1.0).abs() <= 2.0 * f64::EPSILON);
            let (pt, qt) = dtn_ntd_principal(&st);
            assert!((pt - t * p).abs() <= 1e-12 * pt && (qt - q / t).abs() <= 1e-12 * qt);
        }
    }

    #[test]
    fn poisson_kernels() {
        let s = kappa(&laplace(2), &[1.0]).unwrap();
        let k = poisson_principal_kernels(&s, Side::Plus);
        assert_eq!((k.dirichlet(0.0).re, k.neumann(0.0).re), (1.0, 1.0));
        let s2 = kappa(&laplace(2), &[2.0]).unwrap();
        for side in [Side::Plus, Side::Minus] {
            let k = poisson_principal_kernels(&s2, side);
            assert!((k.dirichlet(1.0).re - (-2f64).exp()).abs() < 1e-15);
            assert!((k.neumann(1.0).re - (-2f64).exp() / 2.0).abs() < 1e-15);
        }
        let mut rng = SmallRng::seed_from_u64(2);
        let l = random_local(&mut rng);
        let s = kappa(&l, &[0.3, -1.1]).unwrap();
        for side in [Side::Plus, Side::Minus] {
            let k = poisson_principal_kernels(&s, side);
            let x = 1.0 / k.kappa.re;
            assert!((k.dirichlet(x).norm() - (-1f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_operator_symbols() {
        let s = kappa(&laplace(2), &[1.0]).unwrap();
        assert_eq!(composition_principal(&s), (0.5, 0.5));
        let s2 = kappa(&laplace(2), &[2.0]).unwrap();
        assert_eq!(composition_principal(&s2), (0.25, 1.0 / 16.0));
        assert_eq!(operator_principal_symbol(Kind::DeltaVsFree, &s, 1.0).unwrap(), 0.25);
        assert_eq!(operator_principal_symbol(Kind::DeltaPrimeVsFree, &s, 1.0).unwrap(), 0.5);
        assert_eq!(operator_principal_symbol(Kind::DeltaPrimeVsNeumann, &s, 2.0).unwrap(), 0.5);
        assert!(operator_principal_symbol(Kind::DeltaPrimeVsNeumann, &s, 0.0).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in Kind::ALL {
            assert_eq!(Kind::from_name(k.name()), Some(k));
        }
        assert_eq!(Kind::from_name("nope"), None);
    }
}
