//! Hamiltonians with discrete spectra and validated density matrices.
//!
//! Every matrix in this crate is expressed in the Hamiltonian eigenbasis, which
//! is the computational basis by convention. A [`Hamiltonian`] is therefore just
//! its list of energies plus the value of ħ.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-6;
pub const NORM_TOL: f64 = 1e-12;

/// Discrete spectrum `E_k` together with ħ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    energies: Vec<f64>,
    hbar: f64,
}

impl Hamiltonian {
    pub fn new(energies: Vec<f64>, hbar: f64) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(k) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::BadParameter(format!("energy E_{k} is not finite")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::BadParameter(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { energies, hbar })
    }

    /// Hamiltonian with ħ = 1.
    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        Self::new(energies, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Largest `|E_k - E_k'|`.
    pub fn max_gap(&self) -> f64 {
        let (lo, hi) = self
            .energies
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        hi - lo
    }

    /// `H - λI`.
    pub fn shifted(&self, lambda: f64) -> Self {
        Self {
            energies: self.energies.iter().map(|e| e - lambda).collect(),
            hbar: self.hbar,
        }
    }

    /// Spectrum restricted to the given levels, in the given order.
    pub fn restrict(&self, levels: &[usize]) -> Result<Self> {
        let energies = levels
            .iter()
            .map(|&k| {
                self.energies.get(k).copied().ok_or(Error::DimensionMismatch {
                    expected: self.dim(),
                    got: k + 1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(energies, self.hbar)
    }

    pub fn is_sorted(&self) -> bool {
        self.energies.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Normalized state vector in the energy eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector(Vec<Complex64>);

impl AmplitudeVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self(amplitudes))
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix that is a density matrix by construction (e.g. a unitary
    /// conjugate of a validated state).
    pub(crate) fn from_trusted(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_inner(self) -> CMatrix {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// Diagonal populations `ρ_kk`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.entries[(k, k)].re).collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut values: Vec<f64> = linalg::hermitian_eigenvalues(&self.entries)?.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// Principal submatrix on `levels`, renormalized to unit trace.
    pub fn restrict(&self, levels: &[usize]) -> Result<Self> {
        if let Some(&bad) = levels.iter().find(|&&k| k >= self.dim()) {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: bad + 1 });
        }
        let m = levels.len();
        let block = CMatrix::from_fn(m, m, |i, j| self.entries[(levels[i], levels[j])]);
        let tr = linalg::trace(&block).re;
        if tr <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        validate_density(block / Complex64::new(tr, 0.0))
    }

    /// Commutes with a diagonal Hamiltonian: all coherences between distinct
    /// energies vanish.
    pub fn is_stationary_under(&self, h: &Hamiltonian, tol: f64) -> bool {
        let e = h.energies();
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| e[i] == e[j] || self.entries[(i, j)].norm() <= tol))
    }
}

/// Validates Hermiticity, trace and positivity. Eigenvalues in `[-1e-10, 0)`
/// are clipped to zero and the result renormalized to unit trace.
pub fn validate_density(entries: CMatrix) -> Result<DensityMatrix> {
    let (rows, cols) = entries.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::Empty);
    }
    if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::BadParameter("matrix has non-finite entries".into()));
    }
    let defect = linalg::hermiticity_defect(&entries);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let mut rho = linalg::hermitize(&entries);
    let tr = linalg::trace(&rho).re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::BadTrace(tr - 1.0));
    }

    let (values, vectors) = linalg::hermitian_eigen(&rho)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPositive(min));
    }
    if min < 0.0 {
        rho = linalg::hermitize(&linalg::reconstruct(&values, &vectors, |x| x.max(0.0)));
    }
    let tr = linalg::trace(&rho).re;
    if tr != 1.0 {
        rho /= Complex64::new(tr, 0.0);
    }
    Ok(DensityMatrix { entries: rho })
}

/// `|ψ⟩⟨ψ|`.
pub fn pure_state(psi: &AmplitudeVector) -> DensityMatrix {
    let a = psi.amplitudes();
    let n = a.len();
    DensityMatrix { entries: CMatrix::from_fn(n, n, |i, j| a[i] * a[j].conj()) }
}

/// Diagonal state with the given populations.
pub fn diagonal_state(populations: &[f64]) -> Result<DensityMatrix> {
    let n = populations.len();
    let m = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(populations[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    validate_density(m)
}

/// Thermal state `e^{-βH}/Z`, evaluated with shifted exponentials.
pub fn gibbs_state(h: &Hamiltonian, beta: f64) -> Result<DensityMatrix> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::BadParameter(format!("beta must be positive, got {beta}")));
    }
    let e = h.energies();
    let e_min = e.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = e.iter().map(|&ek| (-beta * (ek - e_min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let n = e.len();
    Ok(DensityMatrix {
        entries: CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(weights[i] / z, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
    })
}

/// Built-in spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelKind {
    /// Two levels `(0, gap)`.
    Qubit { gap: f64 },
    /// `E_k = ħω(k + 1/2)`, `k = 0..n`.
    Oscillator { omega: f64, n: usize },
    /// `E_k = scale·k²`, `k = 1..=n`.
    Box { scale: f64, n: usize },
    /// `n` sorted uniform(0,1) draws from a seeded generator.
    Random { n: usize, seed: u64 },
}

pub fn model_hamiltonian(kind: ModelKind, hbar: f64) -> Result<Hamiltonian> {
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::BadParameter(format!("{name} must be positive, got {v}")))
        }
    };
    let at_least_one = |n: usize| {
        if n >= 1 {
            Ok(())
        } else {
            Err(Error::BadParameter("number of levels must be at least 1".into()))
        }
    };
    let energies = match kind {
        ModelKind::Qubit { gap } => {
            positive("gap", gap)?;
            vec![0.0, gap]
        }
        ModelKind::Oscillator { omega, n } => {
            positive("omega", omega)?;
            at_least_one(n)?;
            (0..n).map(|k| hbar * omega * (k as f64 + 0.5)).collect()
        }
        ModelKind::Box { scale, n } => {
            positive("scale", scale)?;
            at_least_one(n)?;
            (1..=n).map(|k| scale * (k * k) as f64).collect()
        }
        ModelKind::Random { n, seed } => {
            at_least_one(n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut e: Vec<f64> = (0..n)
                .map(|_| loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                })
                .collect();
            e.sort_by(f64::total_cmp);
            e
        }
    };
    Hamiltonian::new(energies, hbar)
}

/// `GG†/tr(GG†)` with `G` an `n×n` matrix of seeded complex Gaussian draws.
pub fn random_density(n: usize, seed: u64) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::BadParameter("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: DMatrix<Complex64> = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let gg = &g * g.adjoint();
    let tr = linalg::trace(&gg).re;
    validate_density(gg / Complex64::new(tr, 0.0))
}

/// Random pure state with seeded complex Gaussian amplitudes.
pub fn random_pure(n: usize, seed: u64) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::BadParameter("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi = AmplitudeVector::new(raw.into_iter().map(|z| z / norm).collect())?;
    Ok(pure_state(&psi))
}
