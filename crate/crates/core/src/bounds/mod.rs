//! Recurrence-time bounds and the classical estimates they are compared with.
//!
//! Two fidelity conventions coexist:
//!
//! * the dimension-only (stroboscopic) bound asks for `F(ρ0, ρ(j·t)) ≥ ε`;
//! * the energy-uncertainty bracket asks for `F(ρ0, ρ(t)) ≥ 1 - ε²/4`.
//!
//! A single user-facing fidelity threshold `f` is mapped to each: the
//! stroboscopic bound uses `ε = f`, the energy bracket uses `ε = 2√(1 - f)`.
//! Every product, power and Gamma ratio is accumulated in log space and only
//! exponentiated at the end, saturating to `+inf` when out of range.

pub mod special;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::metrics::{energy_stats, NormLabel};
use crate::states::{DensityMatrix, Hamiltonian};
use crate::truncation::TruncationResult;

pub use special::{
    ln_gamma, ln_sin_power_integral, ln_sin_power_integral_quadrature, log_gamma_ratio, sin_power_integral,
    sin_power_integral_quadrature,
};

/// Populations below this are dropped before the energy bracket is evaluated.
pub const SUPPORT_TOL: f64 = 1e-14;
/// Energy uncertainty below this counts as a stationary state.
pub const STATIONARY_TOL: f64 = 1e-14;

pub const EPSILON_CONVENTION: &str =
    "energy bracket: F(rho0, rho(t)) >= 1 - eps^2/4; stroboscopic bound: F(rho0, rho(j t)) >= eps_strobe = threshold";
pub const ESTIMATE_LABEL: &str = "order-of-magnitude estimate, not a bound";

/// `ε` of the energy bracket for a fidelity threshold `f`: `2√(1 - f)`.
pub fn energy_epsilon_from_threshold(threshold: f64) -> f64 {
    2.0 * (1.0 - threshold).max(0.0).sqrt()
}

/// Fidelity threshold `1 - ε²/4` guaranteed by the energy bracket.
pub fn threshold_from_energy_epsilon(epsilon: f64) -> f64 {
    1.0 - epsilon * epsilon / 4.0
}

fn exp_saturating(ln: f64) -> f64 {
    if ln >= f64::MAX.ln() {
        f64::INFINITY
    } else {
        ln.exp()
    }
}

/// Dimension-only stroboscopic bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StroboscopicBound {
    pub n: usize,
    pub epsilon: f64,
    /// `+inf` (serialized as `null`) when the bound is infinite or overflows.
    pub jmax: f64,
    /// `+inf` (`null`) only at `ε = 1`.
    pub log_jmax: f64,
    pub infinite: bool,
}

/// `√π · Γ(n²)/Γ(n² + ½) / ∫₀^{√(2-2ε)/2} sin^{2n²-2}(s) ds`.
pub fn thm1_bound(n: usize, epsilon: f64) -> Result<StroboscopicBound> {
    if n == 0 {
        return Err(Error::BadDomain("dimension must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::BadDomain(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let nn = (n * n) as f64;
    let m = u32::try_from(2 * n * n - 2)
        .map_err(|_| Error::BadDomain(format!("dimension {n} too large")))?;
    let upper = (2.0 - 2.0 * epsilon).sqrt() / 2.0;
    let ln_integral = special::ln_sin_power_integral(m, upper)?;
    if ln_integral == f64::NEG_INFINITY {
        return Ok(StroboscopicBound { n, epsilon, jmax: f64::INFINITY, log_jmax: f64::INFINITY, infinite: true });
    }
    let log_jmax = 0.5 * PI.ln() + log_gamma_ratio(nn, nn + 0.5)? - ln_integral;
    let jmax = exp_saturating(log_jmax);
    Ok(StroboscopicBound { n, epsilon, jmax, log_jmax, infinite: jmax.is_infinite() })
}

/// `ln c_n` with `c_n = (n-1) Γ((n-1)/2) 4^{n-1} π^{(n+1)/2}`, `n ≥ 2`.
pub fn ln_c_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadDomain(format!("c_n needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok((nf - 1.0).ln() + ln_gamma((nf - 1.0) / 2.0) + (nf - 1.0) * 4f64.ln() + (nf + 1.0) / 2.0 * PI.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preconditions {
    pub energy_uncertainty_nonzero: bool,
    pub epsilon_admissible: bool,
    /// `π · min_k √p_k` over the retained support.
    pub max_admissible_epsilon: f64,
    pub support_reduced: bool,
    pub thm2_applies: bool,
    pub thm1_jmax_infinite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub epsilon: String,
    pub norm: NormLabel,
    pub lambda: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            epsilon: EPSILON_CONVENTION.into(),
            norm: NormLabel::Trace,
            lambda: "lambda = <H>_rho0 (zero-point shift of the torus geodesic)".into(),
        }
    }
}

/// Every theoretical bracket for one state.
///
/// Linear-scale fields saturate to `+inf` (serialized as `null`) on overflow;
/// the `log_*` companions stay finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Dimension after support reduction.
    pub n: usize,
    pub n_original: usize,
    /// Levels kept (indices into the original basis).
    pub support: Vec<usize>,
    pub epsilon: f64,
    /// `1 - ε²/4`.
    pub fidelity_threshold: f64,
    pub hbar: f64,
    pub lambda: f64,
    pub delta_e: f64,
    /// Mandelstam–Tamm `εħ/ΔE`.
    pub lower_mt: f64,
    pub upper_thm2: f64,
    pub log_upper_thm2: f64,
    /// AM–GM form with `Π√p_k` replaced by `n^{-n/2}`.
    pub upper_thm2_simplified: f64,
    pub log_upper_thm2_simplified: f64,
    pub log_c_n: f64,
    /// Stroboscopic bound evaluated at `ε_strobe = 1 - ε²/4` on the same support.
    pub thm1_epsilon: f64,
    pub thm1_jmax: f64,
    pub log_thm1_jmax: f64,
    pub preconditions: Preconditions,
    pub torus_radii: Vec<f64>,
    pub conventions: Conventions,
}

/// Levels with population at least [`SUPPORT_TOL`].
pub fn support_of(rho: &DensityMatrix) -> Vec<usize> {
    rho.populations()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= SUPPORT_TOL)
        .map(|(k, _)| k)
        .collect()
}

/// Restricts `(H, ρ0)` to the populated levels; returns the reduced pair and the
/// kept indices. Identity when nothing is dropped.
pub fn reduce_to_support(h: &Hamiltonian, rho0: &DensityMatrix) -> Result<(Hamiltonian, DensityMatrix, Vec<usize>)> {
    if h.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: rho0.dim() });
    }
    let support = support_of(rho0);
    if support.len() == rho0.dim() {
        return Ok((h.clone(), rho0.clone(), support));
    }
    Ok((h.restrict(&support)?, rho0.restrict(&support)?, support))
}

/// Mandelstam–Tamm lower edge and the energy-uncertainty upper bound for
/// `F(ρ0, ρ(t)) ≥ 1 - ε²/4`.
pub fn thm2_bounds(h: &Hamiltonian, rho0: &DensityMatrix, epsilon: f64) -> Result<BoundReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::BadDomain(format!("epsilon must be positive, got {epsilon}")));
    }
    let n_original = rho0.dim();
    let (h_red, rho_red, support) = reduce_to_support(h, rho0)?;
    let n = support.len();
    let stats = energy_stats(&h_red, &rho_red)?;
    if n < 2 || stats.uncertainty <= STATIONARY_TOL {
        return Err(Error::StationaryState(stats.uncertainty));
    }
    let p = rho_red.populations();
    let min_p = p.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eps = PI * min_p.sqrt();
    if epsilon >= max_eps {
        return Err(Error::PreconditionViolated { epsilon, max_epsilon: max_eps });
    }

    let hbar = h.hbar();
    let nf = n as f64;
    let ln_c = ln_c_n(n)?;
    let ln_prod_sqrt_p: f64 = p.iter().map(|pk| 0.5 * pk.ln()).sum();
    let ln_tail = hbar.ln() - (nf - 1.0) * epsilon.ln() - stats.uncertainty.ln();
    let log_upper = ln_c + ln_prod_sqrt_p + ln_tail;
    let log_simplified = ln_c - 0.5 * nf * nf.ln() + ln_tail;

    let thm1_eps = threshold_from_energy_epsilon(epsilon);
    let strobe = thm1_bound(n, thm1_eps)?;

    Ok(BoundReport {
        n,
        n_original,
        support,
        epsilon,
        fidelity_threshold: thm1_eps,
        hbar,
        lambda: stats.mean,
        delta_e: stats.uncertainty,
        lower_mt: epsilon * hbar / stats.uncertainty,
        upper_thm2: exp_saturating(log_upper),
        log_upper_thm2: log_upper,
        upper_thm2_simplified: exp_saturating(log_simplified),
        log_upper_thm2_simplified: log_simplified,
        log_c_n: ln_c,
        thm1_epsilon: thm1_eps,
        thm1_jmax: strobe.jmax,
        log_thm1_jmax: strobe.log_jmax,
        preconditions: Preconditions {
            energy_uncertainty_nonzero: true,
            epsilon_admissible: true,
            max_admissible_epsilon: max_eps,
            support_reduced: n < n_original,
            thm2_applies: true,
            thm1_jmax_infinite: strobe.infinite,
        },
        torus_radii: p.iter().map(|pk| pk.sqrt()).collect(),
        conventions: Conventions::default(),
    })
}

/// Largest admissible `ε` for the energy bracket, after support reduction.
pub fn max_admissible_epsilon(rho0: &DensityMatrix) -> f64 {
    let support = support_of(rho0);
    let p = rho0.populations();
    let total: f64 = support.iter().map(|&k| p[k]).sum();
    let min_p = support.iter().map(|&k| p[k] / total).fold(f64::INFINITY, f64::min);
    PI * min_p.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CorollaryMode {
    /// Energy-uncertainty bracket for the normalized relevant block.
    Energy,
    /// Dimension-only bound with `N` levels; with `t` the time ceiling `jmax·t`
    /// is reported as well.
    Dimension { t: Option<f64> },
}

/// Bounds for a state approximated by its first `N` relevant levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub mode: CorollaryMode,
    pub n_relevant: usize,
    pub delta_n: f64,
    pub p_n: f64,
    pub epsilon: f64,
    /// Ceiling on `‖ρ(t_rec) - ρ0‖` at the recurrence.
    pub distance_ceiling: f64,
    pub norm: NormLabel,
    pub bounds: Option<BoundReport>,
    pub thm1_jmax: Option<f64>,
    pub log_thm1_jmax: Option<f64>,
    pub time_ceiling: Option<f64>,
}

/// `2√δ_N + √2·P_N·ε·√(1 - ε²/8)`.
pub fn energy_ceiling(delta_n: f64, p_n: f64, epsilon: f64) -> f64 {
    2.0 * delta_n.sqrt() + std::f64::consts::SQRT_2 * p_n * epsilon * (1.0 - epsilon * epsilon / 8.0).sqrt()
}

/// `2√δ_N + 2·P_N·(1 - ε²)`.
pub fn dimension_ceiling(delta_n: f64, p_n: f64, epsilon: f64) -> f64 {
    2.0 * delta_n.sqrt() + 2.0 * p_n * (1.0 - epsilon * epsilon)
}

pub fn corollary_bounds(
    h: &Hamiltonian,
    trunc: &TruncationResult,
    epsilon: f64,
    mode: CorollaryMode,
) -> Result<CorollaryReport> {
    let n_keep = trunc.n_relevant;
    match mode {
        CorollaryMode::Energy => {
            let h_n = h.restrict(&trunc.levels)?;
            let report = thm2_bounds(&h_n, &trunc.sigma_tilde, epsilon)?;
            Ok(CorollaryReport {
                mode,
                n_relevant: n_keep,
                delta_n: trunc.delta_n,
                p_n: trunc.p_n,
                epsilon,
                distance_ceiling: energy_ceiling(trunc.delta_n, trunc.p_n, epsilon),
                norm: NormLabel::HilbertSchmidt,
                bounds: Some(report),
                thm1_jmax: None,
                log_thm1_jmax: None,
                time_ceiling: None,
            })
        }
        CorollaryMode::Dimension { t } => {
            if let Some(t) = t {
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::BadParameter(format!("stroboscopic step must be positive, got {t}")));
                }
            }
            let strobe = thm1_bound(n_keep, epsilon)?;
            Ok(CorollaryReport {
                mode,
                n_relevant: n_keep,
                delta_n: trunc.delta_n,
                p_n: trunc.p_n,
                epsilon,
                distance_ceiling: dimension_ceiling(trunc.delta_n, trunc.p_n, epsilon),
                norm: NormLabel::HilbertSchmidt,
                bounds: None,
                thm1_jmax: Some(strobe.jmax),
                log_thm1_jmax: Some(strobe.log_jmax),
                time_ceiling: t.map(|t| strobe.jmax * t),
            })
        }
    }
}

/// Inputs of the classical pure-state estimates: level frequencies `ν_i` with
/// `E_i = 2πħν_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorInputs {
    pub n: usize,
    pub nu: Vec<f64>,
    pub epsilon: f64,
}

impl EstimatorInputs {
    pub fn new(nu: Vec<f64>, epsilon: f64) -> Result<Self> {
        if nu.is_empty() {
            return Err(Error::BadDomain("need at least one frequency".into()));
        }
        if nu.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadDomain("frequencies must be finite".into()));
        }
        Ok(Self { n: nu.len(), nu, epsilon })
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 || self.nu.len() != self.n {
            return Err(Error::BadDomain(format!("n = {} but {} frequencies", self.n, self.nu.len())));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::BadDomain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub log_value: f64,
    pub label: String,
}

impl Estimate {
    fn from_log(log_value: f64) -> Self {
        Self { value: exp_saturating(log_value), log_value, label: ESTIMATE_LABEL.into() }
    }
}

/// `1/(√n ν̄ σ)` with `σ = π^{(n-1)/2} R^{n-1} / Γ((n+1)/2)` and `R = √(nε)/(2π)`.
pub fn peres_estimate(inp: &EstimatorInputs) -> Result<Estimate> {
    inp.check()?;
    if inp.nu.iter().any(|&v| v <= 0.0) {
        return Err(Error::BadDomain("frequencies must be positive".into()));
    }
    let nf = inp.n as f64;
    let mean_nu = inp.nu.iter().sum::<f64>() / nf;
    let ln_r = 0.5 * (nf * inp.epsilon).ln() - (2.0 * PI).ln();
    let ln_sigma = (nf - 1.0) / 2.0 * PI.ln() + (nf - 1.0) * ln_r - ln_gamma((nf + 1.0) / 2.0);
    Ok(Estimate::from_log(-0.5 * nf.ln() - mean_nu.ln() - ln_sigma))
}

/// `Γ(n/2) (8π/(ε(n-1)))^{(n-2)/2} / (√(n-1) ν̄_{m1})` with
/// `ν̄_{m1} = √(Σ_{m≥2} (ν_m - ν_1)²) / √(n-1)`.
pub fn bhattacharyya_estimate(inp: &EstimatorInputs) -> Result<Estimate> {
    inp.check()?;
    if inp.n < 2 {
        return Err(Error::BadDomain("needs at least two levels".into()));
    }
    let nf = inp.n as f64;
    let nu1 = inp.nu[0];
    let spread2: f64 = inp.nu[1..].iter().map(|v| (v - nu1).powi(2)).sum();
    if spread2 == 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    let nu_m1 = spread2.sqrt() / (nf - 1.0).sqrt();
    let log_value = -0.5 * (nf - 1.0).ln() - nu_m1.ln()
        + ln_gamma(nf / 2.0)
        + (nf - 2.0) / 2.0 * (8.0 * PI / (inp.epsilon * (nf - 1.0))).ln();
    Ok(Estimate::from_log(log_value))
}
