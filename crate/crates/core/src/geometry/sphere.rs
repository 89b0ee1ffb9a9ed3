//! Geodesic balls on round spheres and tubes around geodesic segments.

use std::f64::consts::PI;

use crate::bounds::special::{ln_gamma, ln_sin_power_integral};
use crate::error::{Error, Result};

/// `ln` of the area of the unit `(n-1)`-sphere, `2π^{n/2}/Γ(n/2)`.
fn ln_unit_sphere_area(n: usize) -> f64 {
    2f64.ln() + 0.5 * n as f64 * PI.ln() - ln_gamma(0.5 * n as f64)
}

/// `ln` of the geodesic ball volume of radius `r` on the unit `n`-sphere.
pub fn ln_sphere_ball_volume(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::BadDomain("sphere dimension must be at least 1".into()));
    }
    if !(0.0..=PI).contains(&r) {
        return Err(Error::BadDomain(format!("ball radius must lie in [0, pi], got {r}")));
    }
    Ok(ln_unit_sphere_area(n) + ln_sin_power_integral((n - 1) as u32, r)?)
}

/// `(2π^{n/2}/Γ(n/2)) ∫₀^r sin^{n-1}(s) ds`.
pub fn sphere_ball_volume(n: usize, r: f64) -> Result<f64> {
    Ok(ln_sphere_ball_volume(n, r)?.exp())
}

/// Volume of the whole unit `n`-sphere, `2π^{(n+1)/2}/Γ((n+1)/2)`.
pub fn sphere_volume(n: usize) -> f64 {
    ln_unit_sphere_area(n + 1).exp()
}

/// `ln` of the `θ`-tube volume around a geodesic segment of length `L` in an
/// `n`-manifold: `2π^{(n-1)/2} / ((n-1)Γ((n-1)/2)) · θ^{n-1} · L`.
///
/// The formula holds while the tube does not overlap itself; checking that is
/// left to the caller.
pub fn ln_tube_volume(n: usize, theta: f64, length: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadDomain(format!("tube needs n >= 2, got {n}")));
    }
    if !(theta.is_finite() && theta > 0.0) || !(length.is_finite() && length > 0.0) {
        return Err(Error::BadDomain(format!("theta and length must be positive, got {theta}, {length}")));
    }
    let k = (n - 1) as f64;
    Ok(2f64.ln() + 0.5 * k * PI.ln() - k.ln() - ln_gamma(0.5 * k) + k * theta.ln() + length.ln())
}

pub fn tube_volume(n: usize, theta: f64, length: f64) -> Result<f64> {
    Ok(ln_tube_volume(n, theta, length)?.exp())
}
