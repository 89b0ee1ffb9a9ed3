//! Finite approximations `σ^N` of a state by its first `N` relevant levels.
//!
//! `δ_N` is the squared Hilbert–Schmidt norm of the block with both indices
//! outside the kept set. The off-diagonal blocks (one index kept, one dropped)
//! are not part of `δ_N`; their weight is reported separately as `cross_hs2`,
//! so that `‖ρ - σ^N‖²_HS = δ_N + cross_hs2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::EvolutionKernel;
use crate::linalg::{self, CMatrix};
use crate::states::{validate_density, DensityMatrix, Hamiltonian};

/// Smallest admissible `P_N`.
pub const MIN_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelOrder {
    /// Basis order, i.e. ascending energy for loaded systems.
    #[default]
    Energy,
    /// Descending population; ties keep basis order.
    Population,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationResult {
    pub n_relevant: usize,
    pub order: LevelOrder,
    /// Kept levels in the original basis, in selection order.
    pub levels: Vec<usize>,
    /// Full ordering used for selection; `None` for basis order.
    pub permutation: Option<Vec<usize>>,
    /// `ρ0` restricted to `levels × levels`, embedded back into `n × n`.
    pub sigma_n: CMatrix,
    /// `σ^N / P_N` as an `N × N` state on `levels`.
    pub sigma_tilde: DensityMatrix,
    pub delta_n: f64,
    pub p_n: f64,
    /// `‖ρ0 - σ^N‖²_HS`.
    pub complement_hs2: f64,
    /// Weight of the mixed blocks, `complement_hs2 - delta_n`.
    pub cross_hs2: f64,
}

pub fn truncate(rho0: &DensityMatrix, n_keep: usize) -> Result<TruncationResult> {
    truncate_ordered(rho0, n_keep, LevelOrder::Energy)
}

pub fn level_ordering(rho0: &DensityMatrix, order: LevelOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rho0.dim()).collect();
    if order == LevelOrder::Population {
        let p = rho0.populations();
        idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    }
    idx
}

pub fn truncate_ordered(rho0: &DensityMatrix, n_keep: usize, order: LevelOrder) -> Result<TruncationResult> {
    let n = rho0.dim();
    if n_keep == 0 || n_keep > n {
        return Err(Error::BadN { n_keep, dim: n });
    }
    let perm = level_ordering(rho0, order);
    let (kept, tail) = perm.split_at(n_keep);
    let rho = rho0.entries();

    let p_n: f64 = kept.iter().map(|&k| rho[(k, k)].re).sum();
    if p_n <= MIN_PROBABILITY {
        return Err(Error::ZeroProbability);
    }
    let block_hs2 = |rows: &[usize], cols: &[usize]| -> f64 {
        rows.iter().flat_map(|&i| cols.iter().map(move |&j| rho[(i, j)].norm_sqr())).sum()
    };
    let delta_n = block_hs2(tail, tail);
    let cross_hs2 = 2.0 * block_hs2(kept, tail);

    let mut mask = vec![false; n];
    for &k in kept {
        mask[k] = true;
    }
    let zero = Complex64::new(0.0, 0.0);
    let sigma_n = CMatrix::from_fn(n, n, |i, j| if mask[i] && mask[j] { rho[(i, j)] } else { zero });

    let block = CMatrix::from_fn(n_keep, n_keep, |i, j| rho[(kept[i], kept[j])]);
    let sigma_tilde = validate_density(block / Complex64::new(p_n, 0.0))?;

    Ok(TruncationResult {
        n_relevant: n_keep,
        order,
        levels: kept.to_vec(),
        permutation: (order != LevelOrder::Energy).then(|| perm.clone()),
        sigma_n,
        sigma_tilde,
        delta_n,
        p_n,
        complement_hs2: delta_n + cross_hs2,
        cross_hs2,
    })
}

/// Smallest `N` with `δ_N ≤ target`; `n` when no smaller `N` qualifies.
pub fn choose_n(rho0: &DensityMatrix, delta_target: f64) -> Result<usize> {
    choose_n_ordered(rho0, delta_target, LevelOrder::Energy)
}

pub fn choose_n_ordered(rho0: &DensityMatrix, delta_target: f64, order: LevelOrder) -> Result<usize> {
    if delta_target.is_nan() || delta_target < 0.0 {
        return Err(Error::BadParameter(format!("delta target must be non-negative, got {delta_target}")));
    }
    let n = rho0.dim();
    let perm = level_ordering(rho0, order);
    let rho = rho0.entries();
    // δ_N for all N at once: shrink the tail from the front.
    for n_keep in 1..n {
        let tail = &perm[n_keep..];
        let delta: f64 = tail.iter().flat_map(|&i| tail.iter().map(move |&j| rho[(i, j)].norm_sqr())).sum();
        if delta <= delta_target {
            return Ok(n_keep);
        }
    }
    Ok(n)
}

/// Time behaviour of `‖ρ(t) - σ^N(t)‖²_HS`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaInvariance {
    pub delta_n: f64,
    pub cross_hs2: f64,
    /// `max_t |‖ρ(t) - σ^N(t)‖² - δ_N|`.
    pub max_deviation: f64,
    /// `max_t |‖ρ(t) - σ^N(t)‖² - ‖ρ0 - σ^N(0)‖²|`.
    pub max_drift: f64,
    /// `max_t |tr σ^N(t) - P_N|`.
    pub max_trace_drift: f64,
    pub samples: usize,
}

pub fn delta_time_invariance_check(
    h: &Hamiltonian,
    rho0: &DensityMatrix,
    n_keep: usize,
    times: &[f64],
) -> Result<DeltaInvariance> {
    let tr = truncate(rho0, n_keep)?;
    delta_time_invariance_for(h, rho0, &tr, times)
}

pub fn delta_time_invariance_for(
    h: &Hamiltonian,
    rho0: &DensityMatrix,
    tr: &TruncationResult,
    times: &[f64],
) -> Result<DeltaInvariance> {
    let kernel = EvolutionKernel::new(h, rho0)?;
    let mut out = DeltaInvariance {
        delta_n: tr.delta_n,
        cross_hs2: tr.cross_hs2,
        max_deviation: 0.0,
        max_drift: 0.0,
        max_trace_drift: 0.0,
        samples: times.len(),
    };
    for &t in times {
        let rho_t = kernel.evolve(t);
        let sigma_t = kernel.propagate(&tr.sigma_n, t);
        let d2: f64 = (rho_t.entries() - &sigma_t).iter().map(|z| z.norm_sqr()).sum();
        out.max_deviation = out.max_deviation.max((d2 - tr.delta_n).abs());
        out.max_drift = out.max_drift.max((d2 - tr.complement_hs2).abs());
        out.max_trace_drift = out.max_trace_drift.max((linalg::trace(&sigma_t).re - tr.p_n).abs());
    }
    Ok(out)
}

/// JSON view of a [`TruncationResult`]; complex entries are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub n_relevant: usize,
    pub order: LevelOrder,
    pub levels: Vec<usize>,
    pub permutation: Option<Vec<usize>>,
    pub delta_n: f64,
    pub p_n: f64,
    pub complement_hs2: f64,
    pub cross_hs2: f64,
    pub sigma_n: Vec<Vec<[f64; 2]>>,
    pub sigma_tilde: Vec<Vec<[f64; 2]>>,
}

impl From<&TruncationResult> for TruncationReport {
    fn from(t: &TruncationResult) -> Self {
        Self {
            n_relevant: t.n_relevant,
            order: t.order,
            levels: t.levels.clone(),
            permutation: t.permutation.clone(),
            delta_n: t.delta_n,
            p_n: t.p_n,
            complement_hs2: t.complement_hs2,
            cross_hs2: t.cross_hs2,
            sigma_n: linalg::to_pairs(&t.sigma_n),
            sigma_tilde: linalg::to_pairs(t.sigma_tilde.entries()),
        }
    }
}
