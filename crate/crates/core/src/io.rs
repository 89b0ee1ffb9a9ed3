//! System files: a spectrum plus an initial state, as JSON.
//!
//! ```json
//! {"energies": [0, 1], "hbar": 1, "state": {"pure": [0.7071, 0.7071]}}
//! ```
//!
//! The spectrum is either `energies` or a built-in `model`. The state is one of
//! `matrix`, `pure`, `diagonal`, `gibbs`, `random` or `random_pure`; complex
//! numbers are written as `[re, im]` or as plain reals. Levels are sorted by
//! ascending energy on load and the state is permuted to match.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::states::{
    diagonal_state, gibbs_state, model_hamiltonian, pure_state, random_density, random_pure, validate_density,
    AmplitudeVector, DensityMatrix, Hamiltonian, ModelKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn value(self) -> Complex64 {
        match self {
            Number::Real(x) => Complex64::new(x, 0.0),
            Number::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    Matrix(Vec<Vec<Number>>),
    Pure(Vec<Number>),
    Diagonal(Vec<f64>),
    Gibbs { beta: f64 },
    Random { seed: u64 },
    RandomPure { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub state: StateSpec,
}

fn default_hbar() -> f64 {
    1.0
}

/// A loaded system in ascending-energy order.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub hamiltonian: Hamiltonian,
    pub rho0: DensityMatrix,
    /// `order[i]` is the input index of level `i`; identity when already sorted.
    pub order: Vec<usize>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<System> {
        let h = match (&self.energies, self.model) {
            (Some(e), None) => Hamiltonian::new(e.clone(), self.hbar)?,
            (None, Some(kind)) => model_hamiltonian(kind, self.hbar)?,
            _ => return Err(Error::Parse("give exactly one of `energies` and `model`".into())),
        };
        let n = h.dim();
        let rho = match &self.state {
            StateSpec::Matrix(rows) => {
                if rows.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: rows.len() });
                }
                if let Some(row) = rows.iter().find(|r| r.len() != n) {
                    return Err(Error::NotSquare { rows: n, cols: row.len() });
                }
                validate_density(CMatrix::from_fn(n, n, |i, j| rows[i][j].value()))?
            }
            StateSpec::Pure(amps) => {
                if amps.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: amps.len() });
                }
                pure_state(&AmplitudeVector::new(amps.iter().map(|a| a.value()).collect())?)
            }
            StateSpec::Diagonal(p) => {
                if p.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: p.len() });
                }
                diagonal_state(p)?
            }
            StateSpec::Gibbs { beta } => gibbs_state(&h, *beta)?,
            StateSpec::Random { seed } => random_density(n, *seed)?,
            StateSpec::RandomPure { seed } => random_pure(n, *seed)?,
        };
        sort_by_energy(h, rho)
    }
}

/// Reorders levels by ascending energy (stable for ties).
pub fn sort_by_energy(h: Hamiltonian, rho: DensityMatrix) -> Result<System> {
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    if h.is_sorted() {
        return Ok(System { hamiltonian: h, rho0: rho, order });
    }
    let e = h.energies();
    order.sort_by(|&a, &b| e[a].total_cmp(&e[b]));
    let hs = Hamiltonian::new(order.iter().map(|&k| e[k]).collect(), h.hbar())?;
    let m = rho.entries();
    let permuted = validate_density(CMatrix::from_fn(n, n, |i, j| m[(order[i], order[j])]))?;
    Ok(System { hamiltonian: hs, rho0: permuted, order })
}

pub fn parse_system(text: &str) -> Result<System> {
    let spec: SystemSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.build()
}

pub fn load_system(path: &Path) -> Result<System> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_system(&text)
}
