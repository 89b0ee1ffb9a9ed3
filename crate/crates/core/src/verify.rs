//! Seeded property suites behind `qrecur verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bounds::{self, max_admissible_epsilon, special};
use crate::error::{Error, Result};
use crate::geometry::metric_space::{metric_recurrence_oracle, random_instance, SpaceFamily};
use crate::geometry::sphere::{sphere_ball_volume, sphere_volume, tube_volume};
use crate::metrics::fvg_check;
use crate::search::{auto_dt, find_recurrence, Grid, SearchOptions};
use crate::states::{random_density, random_pure, Hamiltonian};
use crate::truncation::{delta_time_invariance_check, truncate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Special,
    Fvdg,
    Bracket,
    Truncation,
    Geometry,
    Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: usize,
    pub failures: usize,
    pub skipped: usize,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.into(), checks: 0, failures: 0, skipped: 0, passed: true, notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.notes.len() < 20 {
                self.notes.push(what());
            }
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.failures == 0;
        self
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(match suite {
        Suite::All => vec![
            special_suite()?,
            fvdg_suite(seed)?,
            bracket_suite(seed)?,
            truncation_suite(seed)?,
            geometry_suite()?,
            metric_suite(seed)?,
        ],
        Suite::Special => vec![special_suite()?],
        Suite::Fvdg => vec![fvdg_suite(seed)?],
        Suite::Bracket => vec![bracket_suite(seed)?],
        Suite::Truncation => vec![truncation_suite(seed)?],
        Suite::Geometry => vec![geometry_suite()?],
        Suite::Metric => vec![metric_suite(seed)?],
    })
}

fn special_suite() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("special");
    for i in 1..=20 {
        let eps = i as f64 / 21.0;
        let got = bounds::thm1_bound(1, eps)?.jmax;
        let want = 4.0 / (2.0 - 2.0 * eps).sqrt();
        r.check((got - want).abs() <= 1e-12 * want, || format!("thm1(1, {eps}) = {got}, want {want}"));
    }
    for &m in &[0u32, 1, 6, 30] {
        for &x in &[0.1, 0.5, PI / 2.0, PI] {
            let a = special::sin_power_integral(m, x)?;
            let b = special::sin_power_integral_quadrature(m, x)?;
            r.check((a - b).abs() <= 1e-10, || format!("sin^{m} on [0,{x}]: {a} vs {b}"));
        }
    }
    let ratio = special::log_gamma_ratio(16.0, 16.5)?;
    // Γ(16)/Γ(16.5) = 15! / (Γ(½) Π_{k=0}^{15} (k + ½))
    let mut ln = 0.0;
    for k in 1..16 {
        ln += (k as f64).ln();
    }
    for k in 0..16 {
        ln -= (k as f64 + 0.5).ln();
    }
    ln -= PI.sqrt().ln();
    r.check((ratio - ln).abs() <= 1e-10, || format!("log Γ(16)/Γ(16.5) = {ratio}, want {ln}"));
    Ok(r.finish())
}

fn fvdg_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("fvdg");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..500 {
        let n = rng.random_range(2..=4);
        let (sa, sb) = (rng.random::<u64>(), rng.random::<u64>());
        let a = if rng.random_bool(0.2) { random_pure(n, sa)? } else { random_density(n, sa)? };
        let b = random_density(n, sb)?;
        let c = fvg_check(&a, &b)?;
        r.check(c.lower_ok && c.upper_ok, || format!("n={n} seeds {sa},{sb}: {c:?}"));
    }
    Ok(r.finish())
}

/// Random spectrum with gaps bounded away from zero.
pub fn random_spectrum(n: usize, rng: &mut impl Rng) -> Result<Hamiltonian> {
    let mut e = vec![0.0];
    for _ in 1..n {
        let last = *e.last().expect("non-empty");
        e.push(last + rng.random_range(0.2..1.5));
    }
    Hamiltonian::from_energies(e)
}

fn bracket_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("bracket");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = 100_000usize;
    for _ in 0..40 {
        let n = rng.random_range(2..=4);
        let h = random_spectrum(n, &mut rng)?;
        let rho = random_density(n, rng.random())?;
        let eps = rng.random_range(0.3..0.9) * max_admissible_epsilon(&rho);
        let threshold = bounds::threshold_from_energy_epsilon(eps);
        let report = bounds::thm2_bounds(&h, &rho, eps)?;
        let dt = auto_dt(&h);
        if report.upper_thm2 / dt + 2.0 > horizon as f64 {
            r.skipped += 1;
            continue;
        }
        let grid = Grid::new(0.0, dt, (report.upper_thm2 / dt).ceil() as usize + 2)?;
        let res = find_recurrence(&h, &rho, threshold, grid, SearchOptions::default())?;
        match res.t_rec {
            Some(t) => r.check(t >= report.lower_mt - dt && t <= report.upper_thm2 + dt, || {
                format!("n={n}: t_rec {t} outside [{}, {}]", report.lower_mt, report.upper_thm2)
            }),
            None if res.t_departure.is_none() => r.skipped += 1,
            None => r.check(false, || format!("n={n}: no return before {}", report.upper_thm2)),
        }
    }
    Ok(r.finish())
}

fn truncation_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("truncation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let h = random_spectrum(6, &mut rng)?;
        let rho = random_density(6, rng.random())?;
        let times: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..100.0)).collect();
        let chk = delta_time_invariance_check(&h, &rho, 3, &times)?;
        r.check(chk.max_drift <= 1e-9, || format!("complement norm drifts by {}", chk.max_drift));
        r.check(chk.max_trace_drift <= 1e-12, || format!("tr σ^N(t) drifts by {}", chk.max_trace_drift));
        let mut last_delta = f64::INFINITY;
        let mut last_p = 0.0;
        for k in 1..=6 {
            let t = truncate(&rho, k)?;
            r.check(t.delta_n <= last_delta + 1e-15 && t.p_n >= last_p - 1e-15, || format!("monotonicity at N={k}"));
            last_delta = t.delta_n;
            last_p = t.p_n;
        }
        r.check(last_delta == 0.0 && (last_p - 1.0).abs() <= 1e-12, || "N = n is not exact".into());
    }
    r.notes.push(
        "delta_N is the tail-block weight; |‖ρ(t)-σ^N(t)‖² - δ_N| equals the constant mixed-block weight and is not checked here"
            .into(),
    );
    Ok(r.finish())
}

fn geometry_suite() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("geometry");
    for (n, want) in [(1usize, 2.0 * PI), (2, 4.0 * PI), (3, 2.0 * PI * PI)] {
        let got = sphere_ball_volume(n, PI)?;
        r.check((got - want).abs() <= 1e-10, || format!("S^{n} volume {got}, want {want}"));
        r.check((sphere_volume(n) - want).abs() <= 1e-10, || format!("S^{n} closed form"));
    }
    let (th, l) = (0.37, 1.9);
    let strip = tube_volume(2, th, l)?;
    r.check((strip - 2.0 * th * l).abs() <= 1e-12, || format!("strip {strip}"));
    let cyl = tube_volume(3, th, l)?;
    r.check((cyl - PI * th * th * l).abs() <= 1e-12, || format!("cylinder {cyl}"));
    Ok(r.finish())
}

fn metric_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("metric");
    let families = [SpaceFamily::Cycle, SpaceFamily::Circle, SpaceFamily::Ultrametric];
    for i in 0..100u64 {
        let family = families[(i % 3) as usize];
        let (space, perm, p, rad) = random_instance(family, seed.wrapping_mul(1000).wrapping_add(i))?;
        let o = metric_recurrence_oracle(&space, &perm, p, rad)?;
        r.check(o.ok, || format!("{family:?} instance {i}: N_r {} > bound {}", o.n_r, o.bound));
    }
    Ok(r.finish())
}

/// Fails with the first failing suite name, for exit-code mapping.
pub fn all_passed(reports: &[SuiteReport]) -> Result<()> {
    match reports.iter().find(|r| !r.passed) {
        Some(r) => Err(Error::BadParameter(format!("suite {} failed", r.suite))),
        None => Ok(()),
    }
}
