//! Fitting the constant and remainder order of s_j ~ C j^{−p}.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::modes::SingularSpectrum;
use crate::{Error, Result};

pub const MIN_WINDOW: usize = 50;
pub const SLOPE_SLACK: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Regression,
    Median,
}

impl FitMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FitMethod::Regression => "regression",
            FitMethod::Median => "median",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub exponent: f64,
    pub c_est: f64,
    /// Standard error of the intercept; 0 for the median fallback.
    pub c_stderr: f64,
    pub c_ref: Option<f64>,
    pub rel_error: Option<f64>,
    /// Log-log slope of |j^p s_j − C_ref| (or C_est when no reference is given).
    pub remainder_slope: Option<f64>,
    pub j_min: usize,
    pub j_max: usize,
    pub method: FitMethod,
}

impl FitReport {
    pub fn within(&self, tol: f64) -> bool {
        self.rel_error.is_some_and(|e| e <= tol)
    }
}

/// Least-squares line y = a + b x. Returns (a, b, stderr of a), or `None` if ill-conditioned.
fn line_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 1e-12 * (mx * mx * n).max(f64::MIN_POSITIVE)) {
        return None;
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let sigma2 = if xs.len() > 2 { rss / (n - 2.0) } else { 0.0 };
    let se = (sigma2 * (1.0 / n + mx * mx / sxx)).sqrt();
    (a.is_finite() && b.is_finite()).then_some((a, b, se))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Fit y_j = j^p s_j on [lo, hi] by regressing against j^{−1/(n−1)} and taking the intercept.
pub fn fit_constant(
    spectrum: &SingularSpectrum,
    p: f64,
    n: usize,
    (lo, hi): (usize, usize),
    c_ref: Option<f64>,
) -> Result<FitReport> {
    if !(p > 0.0) || n < 2 {
        return Err(Error::Invalid(format!("bad exponent {p} or dimension {n}")));
    }
    let lo = lo.max(1);
    let hi = hi.min(spectrum.len());
    if hi < lo || hi - lo + 1 < MIN_WINDOW {
        return Err(Error::Invalid(format!(
            "fit window [{lo}, {hi}] has fewer than {MIN_WINDOW} points (spectrum length {})",
            spectrum.len()
        )));
    }
    let gap = 1.0 / (n - 1) as f64;
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    let mut js = Vec::with_capacity(hi - lo + 1);
    for (j, run) in spectrum.window(lo, hi) {
        let jf = j as f64;
        js.push(jf);
        xs.push(jf.powf(-gap));
        ys.push(jf.powf(p) * run.value);
    }
    if ys.iter().all(|y| *y == 0.0) && c_ref.is_some_and(|c| c != 0.0) {
        return Err(Error::Invalid(String::from("spectrum vanishes on the window but the reference does not")));
    }
    let (c_est, c_stderr, method) = match line_fit(&xs, &ys) {
        Some((a, _, se)) => (a, se, FitMethod::Regression),
        None => (median(ys.clone()), 0.0, FitMethod::Median),
    };
    let target = c_ref.unwrap_or(c_est);
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (j, y) in js.iter().zip(&ys) {
        let e = (y - target).abs();
        if e > 0.0 {
            lx.push(j.ln());
            ly.push(e.ln());
        }
    }
    let remainder_slope = if lx.len() >= 2 { line_fit(&lx, &ly).map(|(_, b, _)| b) } else { None };
    Ok(FitReport {
        exponent: p,
        c_est,
        c_stderr,
        c_ref,
        rel_error: c_ref.map(|c| if c == 0.0 { c_est.abs() } else { ((c_est - c) / c).abs() }),
        remainder_slope,
        j_min: lo,
        j_max: hi,
        method,
    })
}

/// Passes iff the measured remainder slope is at most `expected + 0.15`.
pub fn check_remainder_order(report: &FitReport, expected: f64) -> bool {
    report.c_ref.is_some() && report.remainder_slope.is_some_and(|s| s <= expected + SLOPE_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::SpectrumMeta;

    fn synth(len: usize, f: impl Fn(f64) -> f64) -> SingularSpectrum {
        let v: Vec<f64> = (1..=len).map(|j| f(j as f64)).collect();
        SingularSpectrum::from_values(&v, SpectrumMeta::default())
    }

    #[test]
    fn exact_power_law() {
        let s = synth(5000, |j| 2.0 / (j * j * j));
        let r = fit_constant(&s, 3.0, 2, (500, 4000), Some(2.0)).unwrap();
        assert!((r.c_est - 2.0).abs() < 1e-12);
        assert_eq!(r.method, FitMethod::Regression);
    }

    #[test]
    fn one_extra_order() {
        let s = synth(5000, |j| 2.0 / (j * j * j) * (1.0 + 1.0 / j));
        let r = fit_constant(&s, 3.0, 2, (500, 4000), Some(2.0)).unwrap();
        assert!(r.rel_error.unwrap() < 1e-3);
        let slope = r.remainder_slope.unwrap();
        assert!((slope + 1.0).abs() < 1e-6);
        assert!(check_remainder_order(&r, -1.0));
    }

    #[test]
    fn half_order_remainder_slope() {
        let s = synth(5000, |j| (3.0 + j.powf(-0.5)) / (j * j * j));
        let r = fit_constant(&s, 3.0, 2, (500, 4000), Some(3.0)).unwrap();
        assert!((r.remainder_slope.unwrap() + 0.5).abs() < 0.05);
        assert!(!check_remainder_order(&r, -1.0));
    }

    #[test]
    fn scale_equivariance() {
        let s = synth(3000, |j| (1.0 + 0.3 / j.sqrt()) / j.powf(1.5));
        let t = synth(3000, |j| 8.0 * (1.0 + 0.3 / j.sqrt()) / j.powf(1.5));
        let a = fit_constant(&s, 1.5, 3, (100, 3000), None).unwrap();
        let b = fit_constant(&t, 1.5, 3, (100, 3000), None).unwrap();
        assert!((b.c_est - 8.0 * a.c_est).abs() < 1e-12 * b.c_est);
        assert!((a.c_est - 1.0).abs() < 1e-10);
    }

    #[test]
    fn flat_regressor_uses_median_fallback() {
        use crate::modes::Run;
        let runs = alloc::vec![Run { value: 3e-12, mode: None, mult: 2_000_000_000_000 }];
        let s = SingularSpectrum::from_runs(runs, SpectrumMeta::default());
        let lo = 1_000_000_000_000;
        let r = fit_constant(&s, 1.0, 2, (lo, lo + 99), None).unwrap();
        assert_eq!(r.method, FitMethod::Median);
        assert!((r.c_est - 3e-12 * (lo as f64 + 49.5)).abs() < 1e-9 * r.c_est);
    }

    #[test]
    fn rejects_short_windows_and_zero_spectra() {
        let s = synth(100, |j| 1.0 / j);
        assert!(fit_constant(&s, 1.0, 2, (60, 100), None).is_err());
        assert!(fit_constant(&s, 1.0, 2, (1, 49), None).is_err());
        let z = synth(100, |_| 0.0);
        assert!(fit_constant(&z, 3.0, 2, (1, 100), Some(2.0)).is_err());
        assert!(fit_constant(&z, 3.0, 2, (1, 100), Some(0.0)).is_ok());
    }
}
