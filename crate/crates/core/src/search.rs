//! Recurrence-time measurement on time grids.
//!
//! `t_rec` is operational: the first grid time with `F(ρ0, ρ(t)) ≥ threshold`
//! after the first grid time with `F < threshold`. Scans are evaluated in
//! parallel chunks and reduced in index order, so results do not depend on the
//! number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bounds::{self, energy_epsilon_from_threshold, BoundReport};
use crate::error::{Error, Result};
use crate::evolution::{grid_time, EvolutionKernel};
use crate::geometry::torus::{torus_distance, torus_from_state_reduced, torus_phase_on, FlatTorus};
use crate::linalg::CMatrix;
use crate::metrics::{self, energy_stats};
use crate::states::{DensityMatrix, Hamiltonian};

pub const RECURRENCE_DEFINITION: &str =
    "t_rec = first grid time with F >= threshold after the first grid time with F < threshold";
/// Default sample cap for automatic horizons.
pub const DEFAULT_MAX_SAMPLES: usize = 10_000_000;
/// Coherences below this count as absent when testing for stationarity.
pub const STATIONARY_COHERENCE_TOL: f64 = 1e-14;
const CHUNK: usize = 4096;
const REFINE_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(t0: f64, dt: f64, steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || !t0.is_finite() {
            return Err(Error::BadParameter(format!("invalid grid t0={t0}, dt={dt}")));
        }
        if steps == 0 {
            return Err(Error::BadParameter("grid needs at least one step".into()));
        }
        Ok(Self { t0, dt, steps })
    }

    pub fn time(&self, j: usize) -> f64 {
        grid_time(self.t0, self.dt, j)
    }

    pub fn end(&self) -> f64 {
        self.time(self.steps - 1)
    }
}

/// Largest step that still resolves the fastest Bohr frequency:
/// `πħ / (4 max|E_k - E_k'|)`; `+inf` for a fully degenerate spectrum.
pub fn max_dt(h: &Hamiltonian) -> f64 {
    let gap = h.max_gap();
    if gap == 0.0 {
        f64::INFINITY
    } else {
        PI * h.hbar() / (4.0 * gap)
    }
}

/// Default step: [`max_dt`], or `1` for a degenerate spectrum.
pub fn auto_dt(h: &Hamiltonian) -> f64 {
    let d = max_dt(h);
    if d.is_finite() {
        d
    } else {
        1.0
    }
}

/// Number of steps covering `[t0, t0 + upper_thm2 + dt]`, capped at `max_samples`.
/// Falls back to the cap when the energy bracket does not apply.
pub fn auto_steps(h: &Hamiltonian, rho0: &DensityMatrix, threshold: f64, dt: f64, max_samples: usize) -> usize {
    let eps = energy_epsilon_from_threshold(threshold);
    match bounds::thm2_bounds(h, rho0, eps) {
        Ok(b) if b.upper_thm2.is_finite() => {
            let need = (b.upper_thm2 / dt).ceil() + 2.0;
            if need < max_samples as f64 {
                need as usize
            } else {
                max_samples
            }
        }
        _ => max_samples,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Accept grids coarser than [`max_dt`].
    pub allow_coarse: bool,
    /// Bisect the return crossing inside its last grid interval.
    pub refine: bool,
    /// Record a [`SeriesRow`] for every scanned sample.
    pub record_samples: bool,
    /// Keep scanning to the end of the grid after `t_rec` (for recording and
    /// submersion checks over whole grids).
    pub scan_full_grid: bool,
    /// Compare Bures and torus distances at every scanned sample.
    pub check_submersion: bool,
    /// Evaluate the energy bracket for `t_rec`.
    pub bracket: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            allow_coarse: false,
            refine: false,
            record_samples: false,
            scan_full_grid: false,
            check_submersion: false,
            bracket: true,
        }
    }
}

/// One row of the CSV time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub fidelity: f64,
    pub bures: f64,
    pub trace_dist: f64,
    pub hs_dist: f64,
    pub torus_dist: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketCheck {
    pub applicable: bool,
    pub note: Option<String>,
    pub epsilon: f64,
    pub lower_mt: Option<f64>,
    pub upper_thm2: Option<f64>,
    /// `t_rec ≥ lower_mt - dt`.
    pub lower_ok: Option<bool>,
    /// `t_rec ≤ upper_thm2 + dt`.
    pub upper_ok: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubmersionStats {
    pub samples: usize,
    pub violations: usize,
    /// `max(bures - torus_dist)` over the checked samples.
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceResult {
    pub threshold: f64,
    pub definition: String,
    pub hbar: f64,
    pub lambda: f64,
    pub grid: Grid,
    pub stationary: bool,
    pub note: Option<String>,
    pub departure_index: Option<usize>,
    pub t_departure: Option<f64>,
    pub rec_index: Option<usize>,
    pub t_rec: Option<f64>,
    pub fidelity_at_rec: Option<f64>,
    /// Earliest time in the last grid interval at which the bisection saw `F ≥ threshold`.
    pub t_rec_refined: Option<f64>,
    pub samples_scanned: usize,
    pub bracket_check: Option<BracketCheck>,
    pub submersion: Option<SubmersionStats>,
    pub samples: Vec<SeriesRow>,
}

/// Fidelity `F(ρ0, ρ(t))` from `√ρ0` alone: `√ρ(t)` is `√ρ0` evolved.
#[derive(Debug, Clone)]
pub struct FidelityTracker {
    kernel: EvolutionKernel,
    sqrt_rho0: CMatrix,
}

impl FidelityTracker {
    pub fn new(h: &Hamiltonian, rho0: &DensityMatrix) -> Result<Self> {
        let kernel = EvolutionKernel::new(h, rho0)?;
        let sqrt_rho0 = metrics::state_sqrt(rho0)?;
        Ok(Self { kernel, sqrt_rho0 })
    }

    pub fn kernel(&self) -> &EvolutionKernel {
        &self.kernel
    }

    pub fn fidelity(&self, t: f64) -> Result<f64> {
        let root_t = self.kernel.propagate(&self.sqrt_rho0, t);
        metrics::fidelity_from_roots(&self.sqrt_rho0, &root_t)
    }

    /// `(F, d_Bures)` at `t`, with the Bures distance evaluated directly.
    pub fn fidelity_bures(&self, t: f64) -> Result<(f64, f64)> {
        let root_t = self.kernel.propagate(&self.sqrt_rho0, t);
        metrics::fidelity_bures_from_roots(&self.sqrt_rho0, &root_t)
    }

    /// Fidelities at grid indices `[start, end)`, in order.
    pub fn fidelities(&self, grid: &Grid, start: usize, end: usize) -> Result<Vec<f64>> {
        (start..end).into_par_iter().map(|j| self.fidelity(grid.time(j))).collect()
    }
}

/// Geodesic torus of the populated levels with `λ = ⟨H⟩`.
#[derive(Debug, Clone)]
pub struct TorusProbe {
    pub torus: FlatTorus,
    pub levels: Vec<usize>,
    pub lambda: f64,
    h: Hamiltonian,
}

impl TorusProbe {
    pub fn new(h: &Hamiltonian, rho0: &DensityMatrix) -> Result<Self> {
        let (torus, levels) = torus_from_state_reduced(rho0)?;
        let lambda = energy_stats(h, rho0)?.mean;
        Ok(Self { torus, levels, lambda, h: h.clone() })
    }

    pub fn distance(&self, t: f64) -> f64 {
        torus_distance(&self.torus, &torus_phase_on(&self.h, &self.levels, self.lambda, t))
            .expect("phase vector matches torus dimension")
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::BadDomain(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    Ok(())
}

fn check_resolution(h: &Hamiltonian, grid: &Grid, allow_coarse: bool) -> Result<()> {
    let max = max_dt(h);
    if !allow_coarse && grid.dt > max * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse { dt: grid.dt, max_dt: max });
    }
    Ok(())
}

pub fn bracket_check(report: &BoundReport, t_rec: f64, dt: f64) -> BracketCheck {
    BracketCheck {
        applicable: true,
        note: None,
        epsilon: report.epsilon,
        lower_mt: Some(report.lower_mt),
        upper_thm2: Some(report.upper_thm2),
        lower_ok: Some(t_rec >= report.lower_mt - dt),
        upper_ok: Some(t_rec <= report.upper_thm2 + dt),
    }
}

fn bracket_for(h: &Hamiltonian, rho0: &DensityMatrix, threshold: f64, t_rec: Option<f64>, dt: f64) -> BracketCheck {
    let eps = energy_epsilon_from_threshold(threshold);
    match (bounds::thm2_bounds(h, rho0, eps), t_rec) {
        (Ok(report), Some(t)) => bracket_check(&report, t, dt),
        (Ok(report), None) => BracketCheck {
            applicable: true,
            note: Some("no return within the horizon".into()),
            epsilon: eps,
            lower_mt: Some(report.lower_mt),
            upper_thm2: Some(report.upper_thm2),
            lower_ok: None,
            upper_ok: None,
        },
        (Err(e), _) => BracketCheck {
            applicable: false,
            note: Some(e.to_string()),
            epsilon: eps,
            lower_mt: None,
            upper_thm2: None,
            lower_ok: None,
            upper_ok: None,
        },
    }
}

fn series_row(tracker: &FidelityTracker, probe: Option<&TorusProbe>, t: f64) -> Result<SeriesRow> {
    let kernel = tracker.kernel();
    let rho0 = kernel.rho0();
    let rho_t = kernel.evolve(t);
    let (fidelity, bures) = tracker.fidelity_bures(t)?;
    Ok(SeriesRow {
        t,
        fidelity,
        bures,
        trace_dist: metrics::trace_distance_norm(rho0, &rho_t)?,
        hs_dist: metrics::hs_distance(rho0, &rho_t)?,
        torus_dist: probe.map(|p| p.distance(t)),
    })
}

pub fn find_recurrence(
    h: &Hamiltonian,
    rho0: &DensityMatrix,
    threshold: f64,
    grid: Grid,
    options: SearchOptions,
) -> Result<RecurrenceResult> {
    check_threshold(threshold)?;
    check_resolution(h, &grid, options.allow_coarse)?;
    let tracker = FidelityTracker::new(h, rho0)?;
    let stats = energy_stats(h, rho0)?;
    let stationary = rho0.is_stationary_under(h, STATIONARY_COHERENCE_TOL);
    let probe = if options.check_submersion || options.record_samples {
        Some(TorusProbe::new(h, rho0)?)
    } else {
        None
    };

    let mut result = RecurrenceResult {
        threshold,
        definition: RECURRENCE_DEFINITION.into(),
        hbar: h.hbar(),
        lambda: stats.mean,
        grid,
        stationary,
        note: stationary.then(|| Error::StationaryState(stats.uncertainty).to_string()),
        departure_index: None,
        t_departure: None,
        rec_index: None,
        t_rec: None,
        fidelity_at_rec: None,
        t_rec_refined: None,
        samples_scanned: 0,
        bracket_check: None,
        submersion: options.check_submersion.then_some(SubmersionStats {
            samples: 0,
            violations: 0,
            max_excess: f64::NEG_INFINITY,
        }),
        samples: Vec::new(),
    };

    let mut start = 0;
    'scan: while start < grid.steps {
        let end = (start + CHUNK).min(grid.steps);
        let fids = tracker.fidelities(&grid, start, end)?;
        if let (Some(stats), Some(probe)) = (result.submersion.as_mut(), probe.as_ref()) {
            let excess: Result<Vec<f64>> = (start..end)
                .into_par_iter()
                .map(|j| {
                    let t = grid.time(j);
                    Ok(tracker.fidelity_bures(t)?.1 - probe.distance(t))
                })
                .collect();
            for e in excess? {
                stats.samples += 1;
                stats.max_excess = stats.max_excess.max(e);
                if e > crate::metrics::FVDG_SLACK {
                    stats.violations += 1;
                }
            }
        }
        if options.record_samples {
            let rows: Result<Vec<SeriesRow>> =
                (start..end).into_par_iter().map(|j| series_row(&tracker, probe.as_ref(), grid.time(j))).collect();
            result.samples.extend(rows?);
        }
        for (offset, &f) in fids.iter().enumerate() {
            let j = start + offset;
            if result.rec_index.is_some() {
                break;
            }
            match result.departure_index {
                None if f < threshold => {
                    result.departure_index = Some(j);
                    result.t_departure = Some(grid.time(j));
                }
                Some(_) if f >= threshold => {
                    result.rec_index = Some(j);
                    result.t_rec = Some(grid.time(j));
                    result.fidelity_at_rec = Some(f);
                }
                _ => {}
            }
        }
        result.samples_scanned = end;
        start = end;
        if result.rec_index.is_some() && !options.scan_full_grid {
            break 'scan;
        }
    }
    if options.record_samples && !options.scan_full_grid {
        if let Some(j) = result.rec_index {
            result.samples.truncate(j + 1);
            result.samples_scanned = j + 1;
        }
    }
    if let Some(s) = result.submersion.as_mut() {
        if s.samples == 0 {
            s.max_excess = 0.0;
        }
    }

    if options.refine {
        if let Some(j) = result.rec_index {
            result.t_rec_refined = Some(refine_crossing(&tracker, threshold, grid.time(j - 1), grid.time(j))?);
        }
    }
    if options.bracket && !stationary {
        result.bracket_check = Some(bracket_for(h, rho0, threshold, result.t_rec, grid.dt));
    }
    Ok(result)
}

/// Bisection for the return crossing with `F(lo) < threshold ≤ F(hi)`.
fn refine_crossing(tracker: &FidelityTracker, threshold: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..REFINE_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if tracker.fidelity(mid)? >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StroboStatus {
    Found,
    /// The cap was below the theoretical bound and no return was seen.
    CapExceeded,
    /// Searched up to the theoretical bound without a return.
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StroboResult {
    pub epsilon: f64,
    pub t: f64,
    /// Dimension of the populated support used for the bound.
    pub n: usize,
    pub j_found: Option<u64>,
    pub fidelity_at_j: Option<f64>,
    /// `+inf` (`null`) for an infinite bound.
    pub jmax_theory: f64,
    pub log_jmax_theory: f64,
    pub searched_up_to: u64,
    pub status: StroboStatus,
}

/// Smallest `j ≥ 1` with `F(ρ0, ρ(j·t)) ≥ ε`, searched up to
/// `min(jmax_cap, ⌈jmax_theory⌉)`.
pub fn stroboscopic_recurrence(
    h: &Hamiltonian,
    rho0: &DensityMatrix,
    epsilon: f64,
    t: f64,
    jmax_cap: u64,
) -> Result<StroboResult> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::BadParameter(format!("stroboscopic step must be positive, got {t}")));
    }
    let n = bounds::support_of(rho0).len();
    let theory = bounds::thm1_bound(n, epsilon)?;
    let tracker = FidelityTracker::new(h, rho0)?;
    let ceil_theory = if theory.jmax.is_finite() && theory.jmax < u64::MAX as f64 {
        theory.jmax.ceil() as u64
    } else {
        u64::MAX
    };
    let limit = jmax_cap.min(ceil_theory);
    let grid_t = |j: u64| j as f64 * t;

    let mut found = None;
    let mut start = 1u64;
    while start <= limit && found.is_none() {
        let end = (start + CHUNK as u64 - 1).min(limit);
        let fids: Result<Vec<f64>> = (start..=end).into_par_iter().map(|j| tracker.fidelity(grid_t(j))).collect();
        found = fids?.iter().enumerate().find(|(_, &f)| f >= epsilon).map(|(i, &f)| (start + i as u64, f));
        start = end + 1;
    }
    let status = match found {
        Some(_) => StroboStatus::Found,
        None if limit < ceil_theory => StroboStatus::CapExceeded,
        None => StroboStatus::NotFound,
    };
    Ok(StroboResult {
        epsilon,
        t,
        n,
        j_found: found.map(|x| x.0),
        fidelity_at_j: found.map(|x| x.1),
        jmax_theory: theory.jmax,
        log_jmax_theory: theory.log_jmax,
        searched_up_to: limit,
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateResult {
    pub r: f64,
    pub grid: Grid,
    /// All torus coordinates are fixed points: the distance is identically 0.
    pub stationary: bool,
    /// First grid time with Bures distance above `r`.
    pub t_departure: Option<f64>,
    /// First grid time after the departure with torus distance at most `r`.
    pub t_surrogate: Option<f64>,
    pub torus_dist: Option<f64>,
    pub bures_at: Option<f64>,
    /// Bures distance at `t_surrogate` is at most `r` (within `1e-9`).
    pub witness_ok: Option<bool>,
}

/// Surrogate recurrence on the geodesic torus at Bures radius `r`.
///
/// The departure is the state's own (Bures distance above `r`); since the
/// Bures distance never exceeds the torus distance, any torus return after it
/// is also a Bures return.
pub fn torus_surrogate_scan(h: &Hamiltonian, rho0: &DensityMatrix, r: f64, grid: Grid) -> Result<SurrogateResult> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::BadParameter(format!("radius must be positive, got {r}")));
    }
    let probe = TorusProbe::new(h, rho0)?;
    let tracker = FidelityTracker::new(h, rho0)?;
    let e = h.energies();
    let stationary = probe.levels.iter().all(|&k| e[k] == probe.lambda);
    let mut out = SurrogateResult {
        r,
        grid,
        stationary,
        t_departure: None,
        t_surrogate: None,
        torus_dist: None,
        bures_at: None,
        witness_ok: None,
    };
    if stationary {
        let bures = tracker.fidelity_bures(grid.t0)?.1;
        out.t_surrogate = Some(grid.t0);
        out.torus_dist = Some(0.0);
        out.bures_at = Some(bures);
        out.witness_ok = Some(bures <= r + 1e-9);
        return Ok(out);
    }

    let mut departed = false;
    let mut start = 0;
    while start < grid.steps {
        let end = (start + CHUNK).min(grid.steps);
        let rows: Result<Vec<(f64, f64)>> = (start..end)
            .into_par_iter()
            .map(|j| {
                let t = grid.time(j);
                Ok((tracker.fidelity_bures(t)?.1, probe.distance(t)))
            })
            .collect();
        for (offset, (bures, torus)) in rows?.into_iter().enumerate() {
            let t = grid.time(start + offset);
            if !departed {
                if bures > r {
                    departed = true;
                    out.t_departure = Some(t);
                }
            } else if torus <= r {
                out.t_surrogate = Some(t);
                out.torus_dist = Some(torus);
                out.bures_at = Some(bures);
                out.witness_ok = Some(bures <= r + 1e-9);
                return Ok(out);
            }
        }
        start = end;
    }
    Ok(out)
}
