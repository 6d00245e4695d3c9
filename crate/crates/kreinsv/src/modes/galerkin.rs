use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use super::{mode_table, ModeScalars, Radial, Run, SingularSpectrum, SpectrumMeta};
use crate::{Error, Kind, Result};

/// Truncated L²(circle)-orthonormal Fourier basis, ordered
/// `[e₀, c₁, …, c_K, s₁, …, s_K]`.
///
/// Strength coefficients use the layout `[a₀, a₁, b₁, a₂, b₂, …]` for
/// α(θ) = a₀ + Σ a_m cos mθ + b_m sin mθ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GalerkinBasis {
    pub cutoff: usize,
}

impl GalerkinBasis {
    pub fn new(cutoff: usize) -> Self {
        GalerkinBasis { cutoff }
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    /// Fourier mode of basis index `i`.
    pub fn mode(&self, i: usize) -> usize {
        if i <= self.cutoff {
            i
        } else {
            i - self.cutoff
        }
    }

    fn cos_sin(coeffs: &[f64], m: usize) -> (f64, f64) {
        if m == 0 {
            return (coeffs.first().copied().unwrap_or(0.0), 0.0);
        }
        let a = coeffs.get(2 * m - 1).copied().unwrap_or(0.0);
        let b = coeffs.get(2 * m).copied().unwrap_or(0.0);
        (a, b)
    }

    /// Matrix of multiplication by α in this basis.
    pub fn multiplication(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let k = self.cutoff;
        let big_a = |m: i64| {
            let (a, _) = Self::cos_sin(coeffs, m.unsigned_abs() as usize);
            if m == 0 {
                a
            } else {
                0.5 * a
            }
        };
        let big_b = |m: i64| {
            let (_, b) = Self::cos_sin(coeffs, m.unsigned_abs() as usize);
            0.5 * (m.signum() as f64) * b
        };
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        out[(0, 0)] = big_a(0);
        let r2 = core::f64::consts::SQRT_2;
        for j in 1..=k {
            let jj = j as i64;
            out[(0, j)] = r2 * big_a(jj);
            out[(0, k + j)] = r2 * big_b(jj);
            for i in 1..=k {
                let ii = i as i64;
                out[(i, j)] = big_a(ii - jj) + big_a(ii + jj);
                out[(k + i, k + j)] = big_a(ii - jj) - big_a(ii + jj);
                out[(i, k + j)] = big_b(jj + ii) + big_b(jj - ii);
            }
        }
        out.fill_lower_triangle_with_upper_triangle();
        out
    }
}

fn has_sine(coeffs: &[f64]) -> bool {
    coeffs.iter().skip(2).step_by(2).any(|b| *b != 0.0)
}

/// |eigenvalues| of D[(P − α)⁻¹ − P⁻¹]D on one block, D = diag(√r_γ).
fn block_values(alpha: DMatrix<f64>, scalars: &[&ModeScalars]) -> Result<Vec<f64>> {
    let n = scalars.len();
    let p: Vec<f64> = scalars.iter().map(|s| s.p_sum()).collect();
    let d: Vec<f64> = scalars.iter().map(|s| s.r_gamma.sqrt()).collect();
    let mut shifted = -alpha;
    for i in 0..n {
        shifted[(i, i)] += p[i];
    }
    let chol = shifted.cholesky().ok_or_else(|| Error::Admissibility {
        mode: 0,
        reason: String::from("truncated p+ + p- - alpha is not positive definite"),
        min_shift: None,
    })?;
    let mut m = chol.inverse();
    for i in 0..n {
        m[(i, i)] -= 1.0 / p[i];
    }
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] *= d[i] * d[j];
        }
    }
    m.fill_lower_triangle_with_upper_triangle();
    Ok(m.symmetric_eigenvalues().iter().map(|v| v.abs()).collect())
}

/// Singular values of the δ-vs-free resolvent difference on the disk for a
/// trigonometric-polynomial α, on the Fourier basis |k| ≤ `cutoff`.
///
/// Only the largest 2(cutoff − guard) + 1 values are reported; `guard`
/// defaults to cutoff/4. Values carry no mode index.
pub fn fourier_galerkin_singular_values(
    coeffs: &[f64],
    r: f64,
    m0: f64,
    cutoff: usize,
    guard: Option<usize>,
) -> Result<SingularSpectrum> {
    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Invalid(String::from("alpha needs finite Fourier coefficients")));
    }
    let degree = coeffs.len() / 2;
    let guard = guard.unwrap_or(cutoff / 4);
    if guard >= cutoff || cutoff < 2 * degree.max(1) {
        return Err(Error::Invalid(format!(
            "cutoff {cutoff} too small for guard {guard} and alpha of degree {degree}"
        )));
    }
    let geom = Radial::Disk { r };
    let table = mode_table(&geom, m0, cutoff)?;
    let basis = GalerkinBasis::new(cutoff);
    let full = basis.multiplication(coeffs);
    let k = cutoff;
    let mut values = if has_sine(coeffs) {
        let scalars: Vec<&ModeScalars> = (0..basis.dim()).map(|i| &table[basis.mode(i)]).collect();
        block_values(full, &scalars)?
    } else {
        let cos_scalars: Vec<&ModeScalars> = table.iter().collect();
        let sin_scalars: Vec<&ModeScalars> = table[1..].iter().collect();
        let cos = full.view((0, 0), (k + 1, k + 1)).into_owned();
        let sin = full.view((k + 1, k + 1), (k, k)).into_owned();
        #[cfg(feature = "parallel")]
        let (a, b) = rayon::join(|| block_values(cos, &cos_scalars), || block_values(sin, &sin_scalars));
        #[cfg(not(feature = "parallel"))]
        let (a, b) = (block_values(cos, &cos_scalars), block_values(sin, &sin_scalars));
        let mut a = a?;
        a.extend(b?);
        a
    };
    values.sort_by(|x, y| y.total_cmp(x));
    values.truncate(2 * (cutoff - guard) + 1);
    let runs = values.into_iter().map(|value| Run { value, mode: None, mult: 1 }).collect();
    let meta = SpectrumMeta {
        kind: Some(Kind::DeltaVsFree),
        n: 2,
        geometry: String::from("disk"),
        r,
        m0,
        strength: coeffs.to_vec(),
        cutoff,
    };
    Ok(SingularSpectrum::from_runs(runs, meta))
}
