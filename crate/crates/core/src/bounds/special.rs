//! Special functions for the recurrence bounds, all usable in log space.
//!
//! `∫₀^x sin^m(s) ds` is evaluated through the incomplete beta function:
//! for `x ≤ π/2`, `∫₀^x sin^m = ½ B(sin²x; (m+1)/2, ½)`, with the continued
//! fraction in modified Lentz form. The result keeps full relative accuracy
//! even when the integral underflows `f64` (large `m`, small `x`), which is the
//! regime of the dimension-only recurrence bound. An adaptive Gauss–Kronrod
//! quadrature is kept alongside as a second, independent route.

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

use crate::error::{Error, Result};

const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;
const CF_MAX_ITER: usize = 100_000;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs_ln_gamma(x)
}

fn stirling_tail(x: f64) -> f64 {
    let x2 = x * x;
    let inv = 1.0 / x;
    let inv2 = 1.0 / x2;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `ln Γ(a) - ln Γ(b)`.
///
/// For large arguments the two log-gammas are of order `a ln a` while their
/// difference is small, so the Stirling expansions are subtracted term by term
/// instead of subtracting two large numbers.
pub fn log_gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::BadDomain(format!("log_gamma_ratio needs a, b > 0, got ({a}, {b})")));
    }
    if a == b {
        return Ok(0.0);
    }
    if a >= 20.0 && b >= 20.0 {
        // (a-½)ln a - (b-½)ln b = (a-b) ln a + (b-½) ln(a/b)
        let d = a - b;
        let main = d * a.ln() + (b - 0.5) * (d / b).ln_1p() - d;
        return Ok(main + stirling_tail(a) - stirling_tail(b));
    }
    Ok(ln_gamma(a) - ln_gamma(b))
}

/// Continued fraction of the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// `ln B(a, b)`.
fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln B_z(a, b)` where the caller provides `ln z` and `ln(1 - z)` separately
/// (both come from `ln sin` / `ln cos` without cancellation).
fn ln_incomplete_beta(a: f64, b: f64, z: f64, ln_z: f64, ln_1mz: f64) -> f64 {
    if z < (a + 1.0) / (a + b + 2.0) {
        a * ln_z + b * ln_1mz - a.ln() + beta_cf(a, b, z).ln()
    } else {
        let full = ln_beta(a, b);
        let complement = (b * ln_1mz + a * ln_z - b.ln() + beta_cf(b, a, 1.0 - z).ln() - full).exp();
        full + (-complement).ln_1p()
    }
}

/// `ln ∫₀^{π/2} sin^m(s) ds = ln(½ B((m+1)/2, ½))`.
pub fn ln_half_sin_power_integral(m: u32) -> f64 {
    let a = (m as f64 + 1.0) / 2.0;
    ln_beta(a, 0.5) - std::f64::consts::LN_2
}

fn check_domain(x: f64) -> Result<()> {
    if !(x.is_finite() && (0.0..=PI).contains(&x)) {
        return Err(Error::BadDomain(format!("integration limit must lie in [0, π], got {x}")));
    }
    Ok(())
}

/// `ln ∫₀^x sin^m(s) ds` for `x ∈ [0, π]`; `-inf` at `x = 0`.
pub fn ln_sin_power_integral(m: u32, x: f64) -> Result<f64> {
    check_domain(x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x > FRAC_PI_2 {
        // ∫₀^x = 2∫₀^{π/2} - ∫₀^{π-x}, and the result is at least the half integral
        let half = ln_half_sin_power_integral(m);
        let rest = ln_sin_power_integral(m, PI - x)?;
        return Ok(std::f64::consts::LN_2 + half + (-(rest - half - std::f64::consts::LN_2).exp()).ln_1p());
    }
    let a = (m as f64 + 1.0) / 2.0;
    let (s, c) = x.sin_cos();
    let z = s * s;
    let ln_z = 2.0 * s.ln();
    let ln_1mz = if c > 0.0 { 2.0 * c.ln() } else { f64::NEG_INFINITY };
    if c <= 0.0 {
        return Ok(ln_half_sin_power_integral(m));
    }
    Ok(ln_incomplete_beta(a, 0.5, z, ln_z, ln_1mz) - std::f64::consts::LN_2)
}

/// `∫₀^x sin^m(s) ds` for `x ∈ [0, π]` (may underflow to 0 for huge `m`; use
/// [`ln_sin_power_integral`] there).
pub fn sin_power_integral(m: u32, x: f64) -> Result<f64> {
    Ok(ln_sin_power_integral(m, x)?.exp())
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WEIGHTS_K[7];
    let mut gauss = fc * GK_WEIGHTS_G[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS_K[i] * pair;
        if i % 2 == 1 {
            gauss += GK_WEIGHTS_G[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration to `abs_tol`.
///
/// A split that does not shrink the combined error estimate means the estimate
/// is round-off noise; the halves are then accepted as they are.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    fn recurse(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: u32) -> f64 {
        let (value, err) = whole;
        if err <= tol || depth == 0 {
            return value;
        }
        let mid = 0.5 * (a + b);
        let left = gk15(f, a, mid);
        let right = gk15(f, mid, b);
        if left.1 + right.1 >= err {
            return left.0 + right.0;
        }
        recurse(f, a, mid, 0.5 * tol, left, depth - 1) + recurse(f, mid, b, 0.5 * tol, right, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = gk15(&f, a, b);
    recurse(&f, a, b, abs_tol, whole, 40)
}

/// Quadrature route for `∫₀^x sin^m(s) ds`, absolute error below `1e-13`.
pub fn sin_power_integral_quadrature(m: u32, x: f64) -> Result<f64> {
    check_domain(x)?;
    Ok(integrate_adaptive(|s| s.sin().powi(m as i32), 0.0, x, 1e-13))
}

/// Quadrature route in log space: the integrand is scaled by `sin^m` at the
/// peak of `[0, x]` so that it never underflows, and `[0, x]` is cut into
/// panels that double in width away from the peak so the quadrature resolves
/// the boundary layer of width about `1/(m cot x)`.
pub fn ln_sin_power_integral_quadrature(m: u32, x: f64) -> Result<f64> {
    check_domain(x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x > FRAC_PI_2 {
        let head = ln_sin_power_integral_quadrature(m, FRAC_PI_2)?;
        let tail = ln_sin_power_integral_quadrature(m, PI - x)?;
        // ∫₀^x = 2∫₀^{π/2} - ∫₀^{π-x}
        return Ok(head + (2.0 - (tail - head).exp()).ln());
    }
    let ln_peak = x.sin().ln();
    let mf = m as f64;
    let g = |s: f64| (mf * (s.sin().ln() - ln_peak)).exp();
    let slope = mf / x.tan().max(f64::MIN_POSITIVE);
    let mut width = (1.0 / (slope + 1.0)).min(x);
    let mut right = x;
    let mut total = 0.0;
    while right > 0.0 {
        let left = (right - width).max(0.0);
        let part = integrate_adaptive(g, left, right, 1e-17 * width);
        total += part;
        if part <= 1e-18 * total {
            break;
        }
        right = left;
        width *= 2.0;
    }
    Ok(total.ln() + mf * ln_peak)
}
