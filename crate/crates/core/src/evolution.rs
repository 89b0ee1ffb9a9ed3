//! Exact von Neumann evolution in the energy eigenbasis.
//!
//! With `H|k⟩ = E_k|k⟩` the solution of `dρ/dt = -(i/ħ)[H, ρ]` is
//! `ρ_kk'(t) = ρ_kk'(0) · exp(i ω_kk' t)` with Bohr frequencies
//! `ω_kk' = (E_k' - E_k)/ħ`, so a sample costs `O(n²)` phase evaluations and no
//! matrix exponential.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::states::{DensityMatrix, Hamiltonian};

/// Bohr-frequency table plus the initial state.
#[derive(Debug, Clone)]
pub struct EvolutionKernel {
    omega: DMatrix<f64>,
    rho0: DensityMatrix,
    hamiltonian: Hamiltonian,
}

pub fn make_kernel(h: &Hamiltonian, rho0: &DensityMatrix) -> Result<EvolutionKernel> {
    EvolutionKernel::new(h, rho0)
}

impl EvolutionKernel {
    pub fn new(h: &Hamiltonian, rho0: &DensityMatrix) -> Result<Self> {
        let n = h.dim();
        if rho0.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rho0.dim() });
        }
        let e = h.energies();
        let hbar = h.hbar();
        let omega = DMatrix::from_fn(n, n, |k, kp| (e[kp] - e[k]) / hbar);
        Ok(Self { omega, rho0: rho0.clone(), hamiltonian: h.clone() })
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn rho0(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.rho0.dim()
    }

    /// Largest Bohr frequency `max |ω_kk'|`.
    pub fn max_frequency(&self) -> f64 {
        self.omega.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// Conjugates an arbitrary matrix by `exp(-iHt/ħ)` using the phase table.
    pub fn propagate(&self, a: &CMatrix, t: f64) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |k, kp| a[(k, kp)] * Complex64::cis(self.omega[(k, kp)] * t))
    }

    /// `ρ(t)`.
    pub fn evolve(&self, t: f64) -> DensityMatrix {
        DensityMatrix::from_trusted(self.propagate(self.rho0.entries(), t))
    }

    /// `ρ(t0 + j·dt)` for `j = 0..steps`, each sample phased from its absolute time.
    pub fn evolve_grid(&self, t0: f64, dt: f64, steps: usize) -> Result<Vec<DensityMatrix>> {
        if steps == 0 {
            return Err(Error::BadParameter("grid needs at least one step".into()));
        }
        if !(dt.is_finite() && dt > 0.0) || !t0.is_finite() {
            return Err(Error::BadParameter(format!("invalid grid t0={t0}, dt={dt}")));
        }
        Ok((0..steps)
            .into_par_iter()
            .map(|j| self.evolve(grid_time(t0, dt, j)))
            .collect())
    }
}

/// `t0 + j·dt`, the single definition of grid times used across the crate.
#[inline]
pub fn grid_time(t0: f64, dt: f64, j: usize) -> f64 {
    t0 + j as f64 * dt
}

pub fn evolve(kernel: &EvolutionKernel, t: f64) -> DensityMatrix {
    kernel.evolve(t)
}

pub fn evolve_grid(kernel: &EvolutionKernel, t0: f64, dt: f64, steps: usize) -> Result<Vec<DensityMatrix>> {
    kernel.evolve_grid(t0, dt, steps)
}
