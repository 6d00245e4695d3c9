//! Closed curves and surfaces, boundary frames and coefficient fields.
//!
//! Points are stored as `[f64; 3]`; for n = 2 the last component is zero.
//! The normal always points out of the bounded side Ω₋.

use alloc::format;
use core::f64::consts::PI;
use nalgebra::{Matrix2, Matrix3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Circle { r: f64 },
    /// Only for symbol and constant quadrature; there is no mode solver.
    Ellipse { a: f64, b: f64 },
    Sphere { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypersurface {
    shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub n: usize,
    pub t: [f64; 2],
    pub point: Vec3,
    pub normal: Vec3,
    tangents: [Vec3; 2],
}

impl BoundaryFrame {
    pub fn tangents(&self) -> &[Vec3] {
        &self.tangents[..self.n - 1]
    }
}

impl Hypersurface {
    pub fn new(shape: Shape) -> Result<Self> {
        let ok = match shape {
            Shape::Circle { r } | Shape::Sphere { r } => r > 0.0 && r.is_finite(),
            Shape::Ellipse { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
        };
        if !ok {
            return Err(Error::Invalid(format!("non-positive size in {shape:?}")));
        }
        Ok(Hypersurface { shape })
    }

    pub fn circle(r: f64) -> Result<Self> {
        Self::new(Shape::Circle { r })
    }

    pub fn sphere(r: f64) -> Result<Self> {
        Self::new(Shape::Sphere { r })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Sphere { .. } => 3,
            _ => 2,
        }
    }

    /// Parameter box. Curves use `t[0] = θ ∈ [0, 2π]`; the sphere uses
    /// colatitude `t[0] = φ ∈ [0, π]` and azimuth `t[1] = θ ∈ [0, 2π]`.
    pub fn domain(&self) -> [(f64, f64); 2] {
        match self.shape {
            Shape::Sphere { .. } => [(0.0, PI), (0.0, 2.0 * PI)],
            _ => [(0.0, 2.0 * PI), (0.0, 0.0)],
        }
    }

    /// |Σ| in closed form (ellipse perimeter is not closed form and uses quadrature).
    pub fn area(&self) -> f64 {
        match self.shape {
            Shape::Circle { r } => 2.0 * PI * r,
            Shape::Sphere { r } => 4.0 * PI * r * r,
            Shape::Ellipse { .. } => {
                let w = |th: f64| self.measure_weight([th, 0.0]);
                crate::quadrature::adaptive(&w, 0.0, 2.0 * PI, 1e-13).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn frame_at(&self, t: [f64; 2]) -> BoundaryFrame {
        match self.shape {
            Shape::Circle { r } => {
                let (s, c) = t[0].sin_cos();
                BoundaryFrame {
                    n: 2,
                    t,
                    point: [r * c, r * s, 0.0],
                    normal: [c, s, 0.0],
                    tangents: [[-s, c, 0.0], [0.0; 3]],
                }
            }
            Shape::Ellipse { a, b } => {
                let (s, c) = t[0].sin_cos();
                let w = (a * a * s * s + b * b * c * c).sqrt();
                BoundaryFrame {
                    n: 2,
                    t,
                    point: [a * c, b * s, 0.0],
                    normal: [b * c / w, a * s / w, 0.0],
                    tangents: [[-a * s / w, b * c / w, 0.0], [0.0; 3]],
                }
            }
            Shape::Sphere { r } => {
                let (sp, cp) = t[0].sin_cos();
                let (st, ct) = t[1].sin_cos();
                let nu = [sp * ct, sp * st, cp];
                BoundaryFrame {
                    n: 3,
                    t,
                    point: [r * nu[0], r * nu[1], r * nu[2]],
                    normal: nu,
                    tangents: [[cp * ct, cp * st, -sp], [-st, ct, 0.0]],
                }
            }
        }
    }

    /// dσ = weight · dt.
    pub fn measure_weight(&self, t: [f64; 2]) -> f64 {
        match self.shape {
            Shape::Circle { r } => r,
            Shape::Ellipse { a, b } => {
                let (s, c) = t[0].sin_cos();
                (a * a * s * s + b * b * c * c).sqrt()
            }
            Shape::Sphere { r } => r * r * t[0].sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFamily {
    Identity,
    /// Constant symmetric matrix; only the leading n×n block is read.
    Constant(Mat3),
    /// a_jk(x) = δ_jk + eps·cos(x_j + x_k).
    Perturbed { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientField {
    pub n: usize,
    pub family: MatrixFamily,
    /// Scalar zero-order coefficient a(x), taken constant.
    pub a: f64,
    pub m0: f64,
}

impl CoefficientField {
    pub fn new(n: usize, family: MatrixFamily, a: f64, m0: f64) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::Invalid(format!("dimension {n} not in {{2, 3}}")));
        }
        if !(m0 > 0.0 && m0.is_finite() && a.is_finite()) {
            return Err(Error::Invalid(format!("shift m0 = {m0} must be positive")));
        }
        if let MatrixFamily::Constant(m) = family {
            for i in 0..n {
                for j in 0..n {
                    if (m[i][j] - m[j][i]).abs() > 1e-14 * (m[i][j].abs() + m[j][i].abs()) {
                        return Err(Error::Invalid(format!("matrix not symmetric at ({i},{j})")));
                    }
                }
            }
        }
        Ok(CoefficientField { n, family, a, m0 })
    }

    pub fn laplacian(n: usize, m0: f64) -> Result<Self> {
        Self::new(n, MatrixFamily::Identity, 0.0, m0)
    }

    pub fn is_laplacian(&self) -> bool {
        self.family == MatrixFamily::Identity && self.a == 0.0
    }

    pub fn matrix(&self, x: &Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..self.n {
            for j in 0..self.n {
                let d = if i == j { 1.0 } else { 0.0 };
                m[i][j] = match self.family {
                    MatrixFamily::Identity => d,
                    MatrixFamily::Constant(c) => c[i][j],
                    MatrixFamily::Perturbed { eps } => d + eps * (x[i] + x[j]).cos(),
                };
            }
        }
        m
    }

    pub fn min_eigenvalue(&self, x: &Vec3) -> f64 {
        let m = self.matrix(x);
        if self.n == 2 {
            Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
                .symmetric_eigenvalues()
                .min()
        } else {
            Matrix3::from_fn(|i, j| m[i][j]).symmetric_eigenvalues().min()
        }
    }

    /// Smallest eigenvalue of (a_jk) over a `samples`-per-direction grid on Σ.
    pub fn check_ellipticity(&self, surface: &Hypersurface, samples: usize) -> Result<f64> {
        if surface.dim() != self.n {
            return Err(Error::Invalid(format!(
                "coefficients in dimension {} on a surface in dimension {}",
                self.n,
                surface.dim()
            )));
        }
        let dom = surface.domain();
        let inner = if self.n == 3 { samples } else { 1 };
        let mut lo = f64::INFINITY;
        for i in 0..samples {
            for j in 0..inner {
                let t0 = dom[0].0 + (dom[0].1 - dom[0].0) * (i as f64 + 0.5) / samples as f64;
                let t1 = dom[1].0 + (dom[1].1 - dom[1].0) * (j as f64 + 0.5) / inner as f64;
                let x = surface.frame_at([t0, t1]).point;
                lo = lo.min(self.min_eigenvalue(&x));
            }
        }
        if lo <= 0.0 {
            return Err(Error::Ellipticity(format!("smallest eigenvalue {lo:e} on Σ")));
        }
        Ok(lo)
    }
}

/// a_nn ξ_n² + 2 b(ξ′) ξ_n + c(ξ′) in boundary coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalQuadraticData {
    pub n: usize,
    pub a_nn: f64,
    pub b: [f64; 2],
    pub c: [[f64; 2]; 2],
}

impl LocalQuadraticData {
    pub fn b_at(&self, xi: &[f64]) -> f64 {
        (0..self.n - 1).map(|i| self.b[i] * xi[i]).sum()
    }

    pub fn c_at(&self, xi: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n - 1 {
            for j in 0..self.n - 1 {
                s += self.c[i][j] * xi[i] * xi[j];
            }
        }
        s
    }

    pub fn eval(&self, xi: &[f64], xi_n: f64) -> f64 {
        self.a_nn * xi_n * xi_n + 2.0 * self.b_at(xi) * xi_n + self.c_at(xi)
    }
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub fn transform_to_frame(coeffs: &CoefficientField, frame: &BoundaryFrame) -> Result<LocalQuadraticData> {
    if coeffs.n != frame.n {
        return Err(Error::Invalid(format!("dimension mismatch {} vs {}", coeffs.n, frame.n)));
    }
    let a = coeffs.matrix(&frame.point);
    let a_nu = mat_vec(&a, &frame.normal);
    let a_nn = dot(&frame.normal, &a_nu);
    let ts = frame.tangents();
    let mut b = [0.0; 2];
    let mut c = [[0.0; 2]; 2];
    for (i, ti) in ts.iter().enumerate() {
        b[i] = dot(ti, &a_nu);
        let a_ti = mat_vec(&a, ti);
        for (j, tj) in ts.iter().enumerate() {
            c[j][i] = dot(tj, &a_ti);
        }
    }
    let at = frame.point;
    if a_nn <= 0.0 {
        return Err(Error::Ellipticity(format!("a_nn = {a_nn:e} at {at:?}")));
    }
    // a_nn c(ξ′) − b(ξ′)² is the quadratic form a_nn C − b bᵀ.
    let q = |i: usize, j: usize| a_nn * c[i][j] - b[i] * b[j];
    let scale = a_nn * (c[0][0] + c[1][1]).abs();
    let definite = if frame.n == 2 {
        q(0, 0) > 1e-14 * scale
    } else {
        q(0, 0) > 1e-14 * scale && q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0) > 1e-14 * scale * scale
    };
    if !definite {
        return Err(Error::Ellipticity(format!("a_nn c − b² not positive at {at:?}")));
    }
    Ok(LocalQuadraticData { n: frame.n, a_nn, b, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn circle_frames() {
        let c = Hypersurface::circle(1.0).unwrap();
        let f = c.frame_at([0.0, 0.0]);
        assert!(close(&f.point, &[1.0, 0.0, 0.0], 1e-15));
        assert!(close(&f.normal, &[1.0, 0.0, 0.0], 1e-15));
        assert!(close(&f.tangents()[0], &[0.0, 1.0, 0.0], 1e-15));
        let f = c.frame_at([PI / 2.0, 0.0]);
        assert!(close(&f.point, &[0.0, 1.0, 0.0], 1e-15));
        assert!(close(&f.normal, &[0.0, 1.0, 0.0], 1e-15));
        assert!(close(&f.tangents()[0], &[-1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn north_pole() {
        let s = Hypersurface::sphere(2.0).unwrap();
        let f = s.frame_at([0.0, 0.3]);
        assert!(close(&f.normal, &[0.0, 0.0, 1.0], 1e-15));
        assert!(close(&f.point, &[0.0, 0.0, 2.0], 1e-15));
        for t in f.tangents() {
            assert!(t[2].abs() < 1e-15);
        }
    }

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = SmallRng::seed_from_u64(3);
        let shapes = [
            Hypersurface::circle(1.7).unwrap(),
            Hypersurface::ellipse(2.0, 0.5).unwrap(),
            Hypersurface::sphere(0.8).unwrap(),
        ];
        for s in shapes {
            let dom = s.domain();
            for _ in 0..200 {
                let t = [rng.gen_range(dom[0].0..dom[0].1), rng.gen_range(dom[1].0..=dom[1].1)];
                let f = s.frame_at(t);
                let mut basis = alloc::vec![f.normal];
                basis.extend_from_slice(f.tangents());
                for (i, u) in basis.iter().enumerate() {
                    for (j, v) in basis.iter().enumerate() {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((dot(u, v) - e).abs() < 1e-12);
                    }
                }
                assert!(s.measure_weight(t) >= 0.0);
            }
        }
    }

    #[test]
    fn ellipse_normal_points_outward() {
        let s = Hypersurface::ellipse(3.0, 1.0).unwrap();
        for k in 0..16 {
            let f = s.frame_at([k as f64 * 0.4, 0.0]);
            assert!(dot(&f.normal, &f.point) > 0.0);
        }
    }

    #[test]
    fn weights() {
        assert_eq!(Hypersurface::circle(2.5).unwrap().measure_weight([1.0, 0.0]), 2.5);
        let s = Hypersurface::sphere(2.0).unwrap();
        assert!((s.measure_weight([0.5, 1.0]) - 4.0 * 0.5f64.sin()).abs() < 1e-15);
        let e = Hypersurface::ellipse(2.0, 1.0).unwrap();
        let th = 0.7f64;
        let w = (4.0 * th.sin().powi(2) + th.cos().powi(2)).sqrt();
        assert!((e.measure_weight([th, 0.0]) - w).abs() < 1e-15);
    }

    #[test]
    fn total_measure() {
        use crate::quadrature::adaptive;
        let c = Hypersurface::circle(1.3).unwrap();
        let l = adaptive(&|t| c.measure_weight([t, 0.0]), 0.0, 2.0 * PI, 1e-12).unwrap();
        assert!((l - 2.0 * PI * 1.3).abs() < 1e-10 * l);
        let s = Hypersurface::sphere(0.7).unwrap();
        let a = adaptive(
            &|p| adaptive(&|t| s.measure_weight([p, t]), 0.0, 2.0 * PI, 1e-12).unwrap(),
            0.0,
            PI,
            1e-12,
        )
        .unwrap();
        assert!((a - 4.0 * PI * 0.49).abs() < 1e-10 * a);
        // Ramanujan's second approximation is accurate to ~1e-13 at this eccentricity.
        let e = Hypersurface::ellipse(1.2, 1.0).unwrap();
        let h = (0.2f64 / 2.2).powi(2);
        let p = PI * 2.2 * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
        assert!((e.area() - p).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Hypersurface::circle(0.0).is_err());
        assert!(Hypersurface::ellipse(1.0, -1.0).is_err());
        assert!(Hypersurface::sphere(f64::NAN).is_err());
        assert!(CoefficientField::laplacian(2, 0.0).is_err());
        assert!(CoefficientField::laplacian(4, 1.0).is_err());
    }

    #[test]
    fn identity_frame_data() {
        let co = CoefficientField::laplacian(3, 1.0).unwrap();
        let s = Hypersurface::sphere(1.0).unwrap();
        let l = transform_to_frame(&co, &s.frame_at([1.1, 2.0])).unwrap();
        assert!((l.a_nn - 1.0).abs() < 1e-15);
        assert!(l.b[0].abs() < 1e-15 && l.b[1].abs() < 1e-15);
        let xi = [0.6, -0.8];
        assert!((l.c_at(&xi) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_matrix_frame_data() {
        let m = [[1.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 0.0]];
        let co = CoefficientField::new(2, MatrixFamily::Constant(m), 0.0, 1.0).unwrap();
        let c = Hypersurface::circle(1.0).unwrap();
        // θ = π/2 gives ν = e₂.
        let l = transform_to_frame(&co, &c.frame_at([PI / 2.0, 0.0])).unwrap();
        assert!((l.a_nn - 4.0).abs() < 1e-14);
        assert!(l.b[0].abs() < 1e-14);
        assert!((l.c_at(&[1.0]) - 1.0).abs() < 1e-14);
    }

    fn random_rotation(rng: &mut SmallRng) -> Mat3 {
        let (a, b, c) = (rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3));
        let r = nalgebra::Rotation3::from_euler_angles(a, b, c).into_inner();
        [[r[(0, 0)], r[(0, 1)], r[(0, 2)]], [r[(1, 0)], r[(1, 1)], r[(1, 2)]], [r[(2, 0)], r[(2, 1)], r[(2, 2)]]]
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = SmallRng::seed_from_u64(11);
        let s = Hypersurface::sphere(1.0).unwrap();
        for _ in 0..50 {
            let g = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let spd = g * g.transpose() + Matrix3::identity() * 0.5;
            let a: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| spd[(i, j)]));
            let q = random_rotation(&mut rng);
            let qm = Matrix3::from_fn(|i, j| q[i][j]);
            let rot = qm * spd * qm.transpose();
            let ar: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| rot[(i, j)]));
            let f = s.frame_at([rng.gen_range(0.1..3.0), rng.gen_range(0.0..6.2)]);
            let mut fr = f;
            fr.normal = mat_vec(&q, &f.normal);
            fr.tangents = [mat_vec(&q, &f.tangents[0]), mat_vec(&q, &f.tangents[1])];
            let l0 = transform_to_frame(&CoefficientField::new(3, MatrixFamily::Constant(a), 0.0, 1.0).unwrap(), &f).unwrap();
            let l1 = transform_to_frame(&CoefficientField::new(3, MatrixFamily::Constant(ar), 0.0, 1.0).unwrap(), &fr).unwrap();
            assert!((l0.a_nn - l1.a_nn).abs() < 1e-12);
            assert!(close(&l0.b, &l1.b, 1e-12));
            assert!(close(&l0.c[0], &l1.c[0], 1e-12) && close(&l0.c[1], &l1.c[1], 1e-12));
        }
    }

    #[test]
    fn spd_samples_give_positive_forms() {
        let mut rng = SmallRng::seed_from_u64(5);
        let c = Hypersurface::ellipse(1.5, 0.7).unwrap();
        for _ in 0..100 {
            let g = Matrix2::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let spd = g * g.transpose() + Matrix2::identity() * 0.1;
            let mut a = [[0.0; 3]; 3];
            for i in 0..2 {
                for j in 0..2 {
                    a[i][j] = spd[(i, j)];
                }
            }
            let co = CoefficientField::new(2, MatrixFamily::Constant(a), 0.0, 1.0).unwrap();
            let l = transform_to_frame(&co, &c.frame_at([rng.gen_range(0.0..6.28), 0.0])).unwrap();
            assert!(l.a_nn > 0.0);
            for xi in [1.0, -1.0] {
                assert!(l.a_nn * l.c_at(&[xi]) - l.b_at(&[xi]).powi(2) > 0.0);
            }
        }
    }

    #[test]
    fn ellipticity_sampling() {
        let s = Hypersurface::sphere(1.0).unwrap();
        let ok = CoefficientField::new(3, MatrixFamily::Perturbed { eps: 0.2 }, 0.0, 1.0).unwrap();
        assert!(ok.check_ellipticity(&s, 24).unwrap() > 0.3);
        let bad = CoefficientField::new(3, MatrixFamily::Perturbed { eps: 2.0 }, 0.0, 1.0).unwrap();
        assert!(matches!(bad.check_ellipticity(&s, 24), Err(Error::Ellipticity(_))));
        let m = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0; 3]];
        let ind = CoefficientField::new(2, MatrixFamily::Constant(m), 0.0, 1.0).unwrap();
        let c = Hypersurface::circle(1.0).unwrap();
        assert!(ind.check_ellipticity(&c, 16).is_err());
    }
}
