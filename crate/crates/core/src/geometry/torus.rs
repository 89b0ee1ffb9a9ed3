//! Flat product tori `Π S¹(g_j)` and the energy-phase curve on them.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bounds::{support_of, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::states::{DensityMatrix, Hamiltonian};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatTorus {
    radii: Vec<f64>,
}

impl FlatTorus {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::BadParameter(format!("torus radii must be positive, got {r}")));
        }
        Ok(Self { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn dim(&self) -> usize {
        self.radii.len()
    }
}

/// Radii `√ρ0[k][k]`.
pub fn torus_from_state(rho0: &DensityMatrix) -> Result<FlatTorus> {
    let p = rho0.populations();
    if let Some(level) = p.iter().position(|&pk| pk < SUPPORT_TOL) {
        return Err(Error::ZeroPopulation { level });
    }
    FlatTorus::new(p.iter().map(|pk| pk.sqrt()).collect())
}

/// Torus of the populated levels only, with the kept indices.
///
/// Radii are taken from the unnormalized populations so that the geodesic
/// distance stays comparable with the Bures distance of the full state.
pub fn torus_from_state_reduced(rho0: &DensityMatrix) -> Result<(FlatTorus, Vec<usize>)> {
    let support = support_of(rho0);
    let p = rho0.populations();
    Ok((FlatTorus::new(support.iter().map(|&k| p[k].sqrt()).collect())?, support))
}

/// Representative of `θ` in `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Geodesic distance from the origin: `√(Σ g_j² wrap(θ_j)²)`.
pub fn torus_distance(torus: &FlatTorus, theta: &[f64]) -> Result<f64> {
    if theta.len() != torus.dim() {
        return Err(Error::DimensionMismatch { expected: torus.dim(), got: theta.len() });
    }
    Ok(torus
        .radii
        .iter()
        .zip(theta)
        .map(|(g, t)| (g * wrap_angle(*t)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Phases `θ_k = -(E_k - λ)t/ħ` wrapped to `(-π, π]`.
pub fn torus_phase_at(h: &Hamiltonian, lambda: f64, t: f64) -> Vec<f64> {
    let hbar = h.hbar();
    h.energies().iter().map(|e| wrap_angle(-(e - lambda) * t / hbar)).collect()
}

/// Phases restricted to `levels`.
pub fn torus_phase_on(h: &Hamiltonian, levels: &[usize], lambda: f64, t: f64) -> Vec<f64> {
    let (e, hbar) = (h.energies(), h.hbar());
    levels.iter().map(|&k| wrap_angle(-(e[k] - lambda) * t / hbar)).collect()
}

/// Speed of the phase curve: `√(Σ g_k² ((E_k - λ)/ħ)²)`.
pub fn geodesic_speed(torus: &FlatTorus, energies: &[f64], lambda: f64, hbar: f64) -> Result<f64> {
    if energies.len() != torus.dim() {
        return Err(Error::DimensionMismatch { expected: torus.dim(), got: energies.len() });
    }
    Ok(torus
        .radii
        .iter()
        .zip(energies)
        .map(|(g, e)| (g * (e - lambda) / hbar).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `π · min_j g_j`.
pub fn injectivity_radius(torus: &FlatTorus) -> f64 {
    PI * torus.radii.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn ln_torus_volume(torus: &FlatTorus) -> f64 {
    torus.dim() as f64 * (2.0 * PI).ln() + torus.radii.iter().map(|g| g.ln()).sum::<f64>()
}

/// `(2π)^n Π g_j`.
pub fn torus_volume(torus: &FlatTorus) -> f64 {
    ln_torus_volume(torus).exp()
}
