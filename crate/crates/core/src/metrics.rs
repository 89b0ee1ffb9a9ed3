//! Fidelity, Bures distance, trace and Hilbert–Schmidt norms, energy moments.
//!
//! Two norms appear in recurrence statements and they are not interchangeable:
//! the trace norm `Σ|μ_i|` is the one in the Fuchs–van de Graaf inequalities,
//! the Hilbert–Schmidt norm is the one under which the single-entry blocks
//! `ρ^{kk'}` are orthogonal. Reports carry a [`NormLabel`] for that reason.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::states::{DensityMatrix, Hamiltonian};

/// Eigenvalues of a state below this are treated as zero before square roots.
pub const SQRT_CLIP: f64 = 1e-12;
/// Slack allowed in the Fuchs–van de Graaf double inequality.
pub const FVDG_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormLabel {
    Trace,
    HilbertSchmidt,
}

/// Distances between `ρ(t)` and `ρ0` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub t: f64,
    pub fidelity: f64,
    pub bures: f64,
    pub trace_dist: f64,
    pub hs_dist: f64,
}

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    Ok(())
}

/// `√ρ` with eigenvalues under [`SQRT_CLIP`] dropped.
pub fn state_sqrt(rho: &DensityMatrix) -> Result<CMatrix> {
    linalg::psd_sqrt(rho.entries(), SQRT_CLIP)
}

/// Fidelity from precomputed square roots: `‖√ρ √σ‖₁`.
pub fn fidelity_from_roots(sqrt_rho: &CMatrix, sqrt_sigma: &CMatrix) -> Result<f64> {
    let f = linalg::nuclear_norm(&(sqrt_rho * sqrt_sigma))?;
    Ok(f.clamp(0.0, 1.0))
}

/// Fidelity and Bures distance from square roots.
///
/// The Bures distance is evaluated as `‖√ρ - √σ W‖_HS` with the optimal unitary
/// `W`, which stays accurate as `F → 1` where `√(2 - 2F)` loses half the digits.
pub fn fidelity_bures_from_roots(sqrt_rho: &CMatrix, sqrt_sigma: &CMatrix) -> Result<(f64, f64)> {
    let (w, f) = linalg::polar_maximizer(&(sqrt_rho * sqrt_sigma))?;
    let bures = linalg::frobenius(&(sqrt_rho - sqrt_sigma * w));
    Ok((f.clamp(0.0, 1.0), bures))
}

/// Uhlmann fidelity `tr √(√ρ σ √ρ)`, clamped to `[0, 1]`.
///
/// Evaluated as the sum of singular values of `√ρ √σ`, which equals the trace of
/// `√(√ρ σ √ρ)` and avoids taking square roots of round-off-sized eigenvalues.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    fidelity_from_roots(&state_sqrt(rho)?, &state_sqrt(sigma)?)
}

/// `√(2 - 2F)`, never NaN.
pub fn bures_from_fidelity(f: f64) -> f64 {
    (2.0 - 2.0 * f).max(0.0).sqrt()
}

pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(fidelity_bures_from_roots(&state_sqrt(rho)?, &state_sqrt(sigma)?)?.1)
}

/// Trace norm `‖ρ - σ‖₁ = Σ|μ_i|` (no factor 1/2), in `[0, 2]`.
pub fn trace_distance_norm(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    trace_norm_hermitian(&(rho.entries() - sigma.entries()))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMatrix) -> Result<f64> {
    Ok(linalg::hermitian_eigenvalues(a)?.iter().map(|m| m.abs()).sum())
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(a: &CMatrix) -> f64 {
    linalg::frobenius(a)
}

pub fn hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(hs_norm(&(rho.entries() - sigma.entries())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyStats {
    pub mean: f64,
    pub uncertainty: f64,
}

/// `⟨H⟩ = Σ E_k ρ_kk` and `ΔE = √(⟨H²⟩ - ⟨H⟩²)`.
///
/// The variance is accumulated as `Σ (E_k - ⟨H⟩)² ρ_kk`, which is the same
/// quantity but does not lose digits when the spectrum carries a large offset.
pub fn energy_stats(h: &Hamiltonian, rho: &DensityMatrix) -> Result<EnergyStats> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: rho.dim() });
    }
    let p = rho.populations();
    let e = h.energies();
    let mean: f64 = e.iter().zip(&p).map(|(ek, pk)| ek * pk).sum();
    let var: f64 = e.iter().zip(&p).map(|(ek, pk)| (ek - mean).powi(2) * pk).sum();
    Ok(EnergyStats { mean, uncertainty: var.max(0.0).sqrt() })
}

/// Terms of `1 - F ≤ ½‖ρ - σ‖₁ ≤ √(1 - F²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvdgCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub one_minus_f: f64,
    pub half_trace: f64,
    pub sqrt_one_minus_f2: f64,
}

pub fn fvg_check(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<FvdgCheck> {
    let f = fidelity(rho, sigma)?;
    let half_trace = 0.5 * trace_distance_norm(rho, sigma)?;
    let one_minus_f = 1.0 - f;
    let sqrt_one_minus_f2 = (1.0 - f * f).max(0.0).sqrt();
    Ok(FvdgCheck {
        lower_ok: one_minus_f <= half_trace + FVDG_SLACK,
        upper_ok: half_trace <= sqrt_one_minus_f2 + FVDG_SLACK,
        one_minus_f,
        half_trace,
        sqrt_one_minus_f2,
    })
}

/// Ceiling on `‖ρ(t) - ρ0‖₁²` implied by `F ≥ 1 - ε²/4`: `2ε²(1 - ε²/8)`.
pub fn trace_norm_sq_ceiling_energy(epsilon: f64) -> f64 {
    2.0 * epsilon * epsilon * (1.0 - epsilon * epsilon / 8.0)
}

/// Ceiling on `‖ρ(t) - ρ0‖₁²` implied by `F ≥ ε`: `4(1 - ε²)`.
pub fn trace_norm_sq_ceiling_fidelity(epsilon: f64) -> f64 {
    4.0 * (1.0 - epsilon * epsilon)
}

/// All distances between `rho0` and `rho_t`.
pub fn distance_sample(t: f64, rho0: &DensityMatrix, rho_t: &DensityMatrix) -> Result<DistanceSample> {
    check_dims(rho0, rho_t)?;
    let (fidelity, bures) = fidelity_bures_from_roots(&state_sqrt(rho0)?, &state_sqrt(rho_t)?)?;
    Ok(DistanceSample {
        t,
        fidelity,
        bures,
        trace_dist: trace_distance_norm(rho0, rho_t)?,
        hs_dist: hs_distance(rho0, rho_t)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::make_kernel;
    use crate::states::{diagonal_state, pure_state, random_density, random_pure, AmplitudeVector};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn ket(v: &[(f64, f64)]) -> DensityMatrix {
        pure_state(&AmplitudeVector::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap())
    }

    #[test]
    fn fidelity_examples() {
        for seed in 0..5 {
            let r = random_density(3, seed).unwrap();
            assert_abs_diff_eq!(fidelity(&r, &r).unwrap(), 1.0, epsilon = 1e-12);
        }
        let up = ket(&[(1.0, 0.0), (0.0, 0.0)]);
        let down = ket(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_abs_diff_eq!(fidelity(&up, &down).unwrap(), 0.0, epsilon = 1e-15);

        // |cos(ωt/2)| for the equal superposition
        let s = FRAC_1_SQRT_2;
        let plus = ket(&[(s, 0.0), (s, 0.0)]);
        let omega = 1.3;
        let k = make_kernel(&Hamiltonian::from_energies(vec![0.0, omega]).unwrap(), &plus).unwrap();
        for &t in &[0.0, 0.4, 1.0, 2.2, 4.8, 9.1] {
            let f = fidelity(&plus, &k.evolve(t)).unwrap();
            assert_abs_diff_eq!(f, (omega * t / 2.0).cos().abs(), epsilon = 1e-12);
        }

        let three = random_density(3, 1).unwrap();
        assert!(matches!(fidelity(&plus, &three), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bures_examples() {
        let r = random_density(2, 5).unwrap();
        assert_abs_diff_eq!(bures_distance(&r, &r).unwrap(), 0.0, epsilon = 1e-12);
        let p = random_pure(3, 5).unwrap();
        assert_abs_diff_eq!(bures_distance(&p, &p).unwrap(), 0.0, epsilon = 1e-12);
        let up = ket(&[(1.0, 0.0), (0.0, 0.0)]);
        let down = ket(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_abs_diff_eq!(bures_distance(&up, &down).unwrap(), SQRT_2, epsilon = 1e-15);
        assert_eq!(bures_from_fidelity(0.5), 1.0);
        assert_eq!(bures_from_fidelity(1.0 + 1e-15), 0.0);
    }

    #[test]
    fn trace_norm_examples() {
        let r = random_density(3, 2).unwrap();
        assert_abs_diff_eq!(trace_distance_norm(&r, &r).unwrap(), 0.0, epsilon = 1e-15);
        let up = ket(&[(1.0, 0.0), (0.0, 0.0)]);
        let down = ket(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_abs_diff_eq!(trace_distance_norm(&up, &down).unwrap(), 2.0, epsilon = 1e-15);
        let a = diagonal_state(&[0.7, 0.3]).unwrap();
        let b = diagonal_state(&[0.3, 0.7]).unwrap();
        assert_abs_diff_eq!(trace_distance_norm(&a, &b).unwrap(), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn hs_norm_examples() {
        assert_eq!(hs_norm(&CMatrix::zeros(3, 3)), 0.0);
        assert_abs_diff_eq!(hs_norm(&CMatrix::identity(2, 2)), SQRT_2, epsilon = 1e-15);
        let x = CMatrix::from_fn(2, 2, |i, j| Complex64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
        assert_abs_diff_eq!(hs_norm(&x), SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn energy_stats_examples() {
        let h = Hamiltonian::from_energies(vec![0.0, 2.0, 5.0]).unwrap();
        let eig = ket(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let st = energy_stats(&h, &eig).unwrap();
        assert_eq!((st.mean, st.uncertainty), (5.0, 0.0));

        let omega = 3.0;
        let s = FRAC_1_SQRT_2;
        let st = energy_stats(&Hamiltonian::from_energies(vec![0.0, omega]).unwrap(), &ket(&[(s, 0.0), (s, 0.0)])).unwrap();
        assert_abs_diff_eq!(st.mean, omega / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.uncertainty, omega / 2.0, epsilon = 1e-15);

        let mixed = diagonal_state(&[0.5, 0.5]).unwrap();
        let st = energy_stats(&Hamiltonian::from_energies(vec![0.0, 1.0]).unwrap(), &mixed).unwrap();
        assert_eq!((st.mean, st.uncertainty), (0.5, 0.5));

        assert!(energy_stats(&h, &mixed).is_err());
    }

    #[test]
    fn fvdg_examples() {
        let r = random_density(3, 8).unwrap();
        let c = fvg_check(&r, &r).unwrap();
        assert!(c.lower_ok && c.upper_ok);
        let up = ket(&[(1.0, 0.0), (0.0, 0.0)]);
        let down = ket(&[(0.0, 0.0), (1.0, 0.0)]);
        let c = fvg_check(&up, &down).unwrap();
        assert!(c.lower_ok && c.upper_ok);
        assert_abs_diff_eq!(c.one_minus_f, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.half_trace, 1.0, epsilon = 1e-15);

        for seed in 0..100u64 {
            let n = 2 + (seed % 3) as usize;
            let a = random_density(n, 1000 + seed).unwrap();
            let b = random_density(n, 5000 + seed).unwrap();
            let c = fvg_check(&a, &b).unwrap();
            assert!(c.lower_ok && c.upper_ok, "seed {seed}: {c:?}");
        }
    }

    #[test]
    fn pure_state_fidelity_is_overlap() {
        for seed in 0..20u64 {
            let n = 2 + (seed % 4) as usize;
            let a = random_pure(n, seed).unwrap();
            let b = random_pure(n, seed + 100).unwrap();
            // |⟨ψ|φ⟩|² = tr(ρσ) for pure states
            let overlap2: f64 = (a.entries() * b.entries()).trace().re;
            assert_abs_diff_eq!(fidelity(&a, &b).unwrap(), overlap2.max(0.0).sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn symmetry_and_unitary_invariance() {
        let h = Hamiltonian::from_energies(vec![0.0, 0.9, 2.4, 3.1]).unwrap();
        for seed in 0..30u64 {
            let a = random_density(4, seed).unwrap();
            let b = random_density(4, seed + 77).unwrap();
            let f = fidelity(&a, &b).unwrap();
            assert_abs_diff_eq!(f, fidelity(&b, &a).unwrap(), epsilon = 1e-9);
            let ka = make_kernel(&h, &a).unwrap();
            let kb = make_kernel(&h, &b).unwrap();
            let t = 0.37 * seed as f64;
            assert_abs_diff_eq!(fidelity(&ka.evolve(t), &kb.evolve(t)).unwrap(), f, epsilon = 1e-9);
        }
    }

    #[test]
    fn distance_sample_is_consistent() {
        let a = random_density(3, 11).unwrap();
        let b = random_density(3, 12).unwrap();
        let s = distance_sample(1.5, &a, &b).unwrap();
        assert_abs_diff_eq!(s.bures * s.bures, 2.0 - 2.0 * s.fidelity, epsilon = 1e-12);
        assert!(s.trace_dist >= 0.0 && s.trace_dist <= 2.0);
        assert!(s.hs_dist <= s.trace_dist + 1e-12);
    }
}
