//! Modified Bessel functions I_k, K_k of integer order and the spherical
//! variants i_l = √(π/2x) I_{l+1/2}, k_l = √(π/2x) K_{l+1/2}.
//!
//! Derivatives use the stable forms
//! I′_k = I_{k+1} + (k/x) I_k (equivalently I_{k−1} − (k/x) I_k),
//! K′_k = −K_{k−1} − (k/x) K_k,
//! i′_l = i_{l+1} + (l/x) i_l and k′_l = −k_{l−1} − ((l+1)/x) k_l (equivalently −k_{l+1} + (l/x) k_l).
//!
//! Scaled values are e^{−x}·I and e^{x}·K; the derivative field carries the
//! same factor as the value.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE: f64 = 1e250;
const LN_MAX: f64 = 709.782_712_893_384;
const LN_MIN: f64 = -708.396_418_532_264_1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub order: usize,
    pub x: f64,
    pub value: f64,
    pub derivative: f64,
    pub scaled: bool,
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(alloc::format!("argument x = {x} must be positive and finite")))
    }
}

/// Value `mant · RESCALE^{−count}`, times e^{shift} unless `scaled`.
fn finish(mant: f64, count: i32, shift: f64, scaled: bool, name: &'static str) -> Result<f64> {
    let shift = if scaled { 0.0 } else { shift };
    let l = mant.ln() - count as f64 * RESCALE.ln() + shift;
    if l > LN_MAX {
        return Err(Error::Overflow(name));
    }
    if l < LN_MIN {
        return Err(Error::Underflow(name));
    }
    if count == 0 {
        Ok(mant * shift.exp())
    } else {
        Ok(l.exp())
    }
}

/// e^{−x} Z_k as `(mantissa, rescale count)` and Z_{k+1}/Z_k for Z_k = I_{k+s}, s ∈ {0, 1/2}, by Miller's
/// downward recurrence normalized with e^x = I_0 + 2ΣI_j (s = 0) or
/// e^x = Σ(2l+1) i_l (s = 1/2).
fn miller(k: usize, x: f64, half: bool) -> (f64, i32, f64) {
    let s = if half { 0.5 } else { 0.0 };
    let weight = |j: usize| if half { (2 * j + 1) as f64 } else if j == 0 { 1.0 } else { 2.0 };
    let top = k + 3 * x.ceil() as usize + 60;
    let (mut hi, mut cur) = (0.0f64, 1.0f64);
    let mut sum = weight(top) * cur;
    let mut lscale = 0;
    let (mut vk, mut lk, mut ratio) = (1.0, 0, 0.0);
    for j in (1..=top).rev() {
        let next = 2.0 * (j as f64 + s) / x * cur + hi;
        hi = cur;
        cur = next;
        sum += weight(j - 1) * cur;
        if j - 1 == k {
            vk = cur;
            lk = lscale;
            ratio = hi / cur;
        }
        if cur > RESCALE {
            cur /= RESCALE;
            hi /= RESCALE;
            sum /= RESCALE;
            lscale += 1;
        }
    }
    (vk / sum, lscale - lk, ratio)
}

pub fn bessel_i(k: usize, x: f64, scaled: bool) -> Result<BesselValue> {
    check_x(x)?;
    let (mant, count, ratio) = miller(k, x, false);
    let value = finish(mant, count, x, scaled, "I_k in unscaled form; use the scaled variant")?;
    Ok(BesselValue { order: k, x, value, derivative: value * (ratio + k as f64 / x), scaled })
}

pub fn spherical_i(l: usize, x: f64, scaled: bool) -> Result<BesselValue> {
    check_x(x)?;
    let (mant, count, ratio) = miller(l, x, true);
    let value = finish(mant, count, x, scaled, "i_l in unscaled form; use the scaled variant")?;
    Ok(BesselValue { order: l, x, value, derivative: value * (ratio + l as f64 / x), scaled })
}

/// (e^x K_0(x), e^x K_1(x)).
///
/// For x ≤ 2 the K_0 power series and the Wronskian I_0K_1 + I_1K_0 = 1/x; for
/// x > 2 Steed's continued fraction (Temme's CF2 at order 0).
pub fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let y = 0.25 * x * x;
        let (mut term, mut h) = (1.0, 0.0);
        let (mut i0, mut i1, mut ser) = (1.0, 0.5, 0.0);
        let mut t1 = 0.5;
        for m in 1..60 {
            let mf = m as f64;
            term *= y / (mf * mf);
            h += 1.0 / mf;
            i0 += term;
            ser += term * h;
            t1 *= y / (mf * (mf + 1.0));
            i1 += t1;
            if term < 1e-18 * i0 && t1 < 1e-18 * i1 {
                break;
            }
        }
        let i1 = i1 * x;
        let k0 = -((0.5 * x).ln() + EULER_GAMMA) * i0 + ser;
        let k1 = (1.0 / x - i1 * k0) / i0;
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let (mut q1, mut q2) = (0.0, 1.0);
        let a1 = 0.25;
        let (mut q, mut c) = (a1, a1);
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..10_000 {
            a -= (2 * (i - 1)) as f64;
            c = -a * c / i as f64;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-17 {
                break;
            }
        }
        let h = a1 * h;
        let k0 = (PI / (2.0 * x)).sqrt() / s;
        (k0, k0 * (x + 0.5 - h) / x)
    }
}

/// Upward recurrence Z_{j+1} = Z_{j−1} + (2(j+s)/x) Z_j from (z0, z1), returning
/// Z_{k−1}, Z_k, Z_{k+1} as mantissas times RESCALE^{count} (with Z_{−1} supplied as `zm1`).
fn upward(k: usize, x: f64, s: f64, zm1: f64, z0: f64, z1: f64) -> ([f64; 3], i32) {
    let (mut prev, mut cur, mut next) = (zm1, z0, z1);
    let mut count = 0;
    for j in 1..=k {
        let nn = cur + 2.0 * (j as f64 + s) / x * next;
        prev = cur;
        cur = next;
        next = nn;
        if next > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            next /= RESCALE;
            count += 1;
        }
    }
    ([prev, cur, next], count)
}

pub fn bessel_k(k: usize, x: f64, scaled: bool) -> Result<BesselValue> {
    check_x(x)?;
    let (k0, k1) = k01_scaled(x);
    let ([zm, z0, _], count) = upward(k, x, 0.0, k1, k0, k1);
    let name = if scaled { "scaled K_k" } else { "K_k in unscaled form; use the scaled variant" };
    let value = finish(z0, -count, -x, scaled, name)?;
    // K′ = −K_{k−1} − (k/x)K_k, with the same scale factor as K_k.
    let derivative = -value * (zm / z0 + k as f64 / x);
    Ok(BesselValue { order: k, x, value, derivative, scaled })
}

pub fn spherical_k(l: usize, x: f64, scaled: bool) -> Result<BesselValue> {
    check_x(x)?;
    let k0 = PI / (2.0 * x);
    let ([zm, z0, _], count) = upward(l, x, 0.5, k0, k0, k0 * (1.0 + 1.0 / x));
    let name = if scaled { "scaled k_l" } else { "k_l in unscaled form; use the scaled variant" };
    let value = finish(z0, -count, -x, scaled, name)?;
    let derivative = -value * (zm / z0 + (l as f64 + 1.0) / x);
    Ok(BesselValue { order: l, x, value, derivative, scaled })
}

/// Z_{k+1}/Z_k for Z = I (s = 0) or i (s = 1/2), k = 0..=kmax, by the
/// backward continued-fraction sweep r_{k−1} = 1/(2(k+s)/x + r_k).
pub fn i_ratios(kmax: usize, x: f64, half: bool) -> Vec<f64> {
    let s = if half { 0.5 } else { 0.0 };
    let top = kmax + 3 * x.ceil() as usize + 60;
    let mut r = 0.0;
    let mut out = alloc::vec![0.0; kmax + 1];
    for j in (1..=top + 1).rev() {
        r = 1.0 / (2.0 * (j as f64 + s) / x + r);
        if j - 1 <= kmax {
            out[j - 1] = r;
        }
    }
    out
}

/// Z_{k+1}/Z_k for a single order by modified Lentz on the same continued fraction.
pub fn i_ratio(k: usize, x: f64, half: bool) -> Result<f64> {
    check_x(x)?;
    let s = if half { 0.5 } else { 0.0 };
    let tiny = 1e-300;
    // r_k = 1/(b_1 + 1/(b_2 + ...)), b_j = 2(k+j+s)/x
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..100_000 {
        let b = 2.0 * ((k + j) as f64 + s) / x;
        d = b + d;
        if d == 0.0 {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(f);
        }
    }
    Err(Error::NoConvergence(alloc::format!("I-ratio continued fraction at k = {k}, x = {x}")))
}

/// Z_{k+1}/Z_k for Z = K (s = 0) or spherical k (s = 1/2), k = 0..=kmax, by
/// t_k = 1/t_{k−1} + 2(k+s)/x.
pub fn k_ratios(kmax: usize, x: f64, half: bool) -> Vec<f64> {
    let s = if half { 0.5 } else { 0.0 };
    let mut out = Vec::with_capacity(kmax + 1);
    let t0 = if half {
        1.0 + 1.0 / x
    } else {
        let (k0, k1) = k01_scaled(x);
        k1 / k0
    };
    out.push(t0);
    for k in 1..=kmax {
        let t = 1.0 / out[k - 1] + 2.0 * (k as f64 + s) / x;
        out.push(t);
    }
    out
}
