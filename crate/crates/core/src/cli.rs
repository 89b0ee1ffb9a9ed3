//! Command-line front end.
//!
//! Exit codes: 0 success, 1 precondition or domain failure (error JSON on
//! stdout), 2 I/O or parse failure. Reports are JSON; time series are CSV.
//! Worker threads come from `QRECUR_THREADS` (default: available parallelism).

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bounds::{
    self, corollary_bounds, energy_epsilon_from_threshold, thm1_bound, CorollaryMode, EPSILON_CONVENTION,
};
use crate::error::{Error, Result};
use crate::geometry::metric_space::{metric_recurrence_oracle, MetricInstance};
use crate::geometry::sphere::{sphere_ball_volume, tube_volume};
use crate::geometry::torus::{injectivity_radius, ln_torus_volume, torus_from_state_reduced};
use crate::io::{load_system, System};
use crate::metrics::{energy_stats, NormLabel};
use crate::search::{
    auto_steps, find_recurrence, max_dt, stroboscopic_recurrence, Grid, RecurrenceResult, SearchOptions,
    DEFAULT_MAX_SAMPLES,
};
use crate::truncation::{choose_n_ordered, truncate_ordered, LevelOrder, TruncationReport};
use crate::verify::{run_suite, Suite};

pub const THREADS_ENV: &str = "QRECUR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qrecur", version, about = "Recurrence-time bounds and measurements for finite quantum systems")]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Theoretical brackets for a system at a fidelity threshold.
    Bounds(BoundsArgs),
    /// Measure the recurrence time on a grid.
    Search(SearchArgs),
    /// Stroboscopic return `F(ρ0, ρ(j·t)) ≥ ε`.
    Strobe(StrobeArgs),
    /// Relevant-level truncation and its corollary ceilings.
    Truncate(TruncateArgs),
    /// Seeded property suites.
    Verify(VerifyArgs),
    /// Sphere balls, tubes, tori and finite metric spaces.
    #[command(subcommand)]
    Geometry(GeometryCommand),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fidelity threshold in (0, 1).
    #[arg(long)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub threshold: f64,
    /// Time step, or `auto` for πħ/(4 max gap).
    #[arg(long, default_value = "auto")]
    pub dt: String,
    /// Last time to scan, or `auto` for min(upper bound, max-samples).
    #[arg(long, default_value = "auto")]
    pub horizon: String,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_SAMPLES)]
    pub max_samples: usize,
    /// Accept a step coarser than the resolvable maximum.
    #[arg(long)]
    pub allow_coarse: bool,
    /// Bisect the return crossing (10 iterations).
    #[arg(long)]
    pub refine: bool,
    /// Write the scanned time series as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Scan the whole grid instead of stopping at the return.
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Args)]
pub struct StrobeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fidelity level ε in (0, 1].
    #[arg(long)]
    pub epsilon: f64,
    /// Stroboscopic step.
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub cap: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Energy,
    Population,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Energy,
    Dimension,
}

#[derive(Debug, Args)]
pub struct TruncateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Number of relevant levels.
    #[arg(long, conflicts_with = "delta_target")]
    pub n: Option<usize>,
    /// Choose the smallest N with δ_N at most this.
    #[arg(long)]
    pub delta_target: Option<f64>,
    #[arg(long, value_enum, default_value = "energy")]
    pub order: OrderArg,
    /// ε for the corollary ceilings.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "energy")]
    pub mode: ModeArg,
    /// Stroboscopic step for the dimension mode.
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum GeometryCommand {
    /// Geodesic ball volume on the unit n-sphere.
    Sphere {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: f64,
    },
    /// Tube volume around a geodesic segment.
    Tube {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        length: f64,
    },
    /// Flat torus of a system's initial state.
    Torus {
        #[arg(long)]
        input: PathBuf,
    },
    /// Brute-force recurrence on a finite metric space.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        point: usize,
        #[arg(long)]
        r: f64,
    },
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn error_json(e: &Error) -> Value {
    json!({"error": {"kind": e.kind(), "message": e.to_string()}})
}

fn conventions(hbar: f64, lambda: Option<f64>) -> Value {
    json!({
        "epsilon": EPSILON_CONVENTION,
        "norms": {"corollary_distance": NormLabel::HilbertSchmidt, "fuchs_van_de_graaf": NormLabel::Trace},
        "hbar": hbar,
        "lambda": lambda,
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn parse_auto(s: &str, name: &str) -> Result<Option<f64>> {
    if s == "auto" {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::BadParameter(format!("--{name} must be a number or `auto`, got {s}")))
}

fn lambda_of(sys: &System) -> Result<f64> {
    Ok(energy_stats(&sys.hamiltonian, &sys.rho0)?.mean)
}

fn bounds_cmd(a: &BoundsArgs) -> Result<Value> {
    let sys = load_system(&a.input)?;
    if !(a.threshold > 0.0 && a.threshold < 1.0) {
        return Err(Error::BadDomain(format!("threshold must lie in (0, 1), got {}", a.threshold)));
    }
    let eps = energy_epsilon_from_threshold(a.threshold);
    let report = bounds::thm2_bounds(&sys.hamiltonian, &sys.rho0, eps)?;
    let strobe = thm1_bound(report.n, a.threshold)?;
    Ok(json!({
        "command": "bounds",
        "threshold": a.threshold,
        "conventions": conventions(sys.hamiltonian.hbar(), Some(report.lambda)),
        "bounds": to_value(&report),
        "stroboscopic_at_threshold": to_value(&strobe),
    }))
}

fn write_csv(path: &Path, res: &RecurrenceResult) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(w, "t,fidelity,bures,trace_dist,hs_dist,torus_dist").map_err(io)?;
    // shortest round-trip representation, as in the JSON reports
    let num = |x: f64| serde_json::to_string(&x).expect("finite floats serialize");
    for s in &res.samples {
        let torus = s.torus_dist.map(num).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(s.t),
            num(s.fidelity),
            num(s.bures),
            num(s.trace_dist),
            num(s.hs_dist),
            torus
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

fn search_cmd(a: &SearchArgs) -> Result<Value> {
    let sys = load_system(&a.input)?;
    let h = &sys.hamiltonian;
    let dt = match parse_auto(&a.dt, "dt")? {
        Some(dt) => dt,
        None => crate::search::auto_dt(h),
    };
    let steps = match parse_auto(&a.horizon, "horizon")? {
        None => auto_steps(h, &sys.rho0, a.threshold, dt, a.max_samples),
        Some(horizon) => {
            if !(horizon.is_finite() && horizon >= a.t0) {
                return Err(Error::BadParameter(format!("horizon {horizon} must be at least t0")));
            }
            let need = ((horizon - a.t0) / dt).floor() + 1.0;
            if need > a.max_samples as f64 {
                a.max_samples
            } else {
                need as usize
            }
        }
    };
    let grid = Grid::new(a.t0, dt, steps)?;
    let options = SearchOptions {
        allow_coarse: a.allow_coarse,
        refine: a.refine,
        record_samples: a.csv.is_some(),
        scan_full_grid: a.full,
        check_submersion: true,
        bracket: true,
    };
    let mut res = find_recurrence(h, &sys.rho0, a.threshold, grid, options)?;
    if let Some(path) = &a.csv {
        write_csv(path, &res)?;
    }
    let samples = std::mem::take(&mut res.samples);
    Ok(json!({
        "command": "search",
        "conventions": conventions(h.hbar(), Some(res.lambda)),
        "max_dt": max_dt(h),
        "skipped_instances": 0,
        "samples_written": samples.len(),
        "result": to_value(&res),
    }))
}

fn strobe_cmd(a: &StrobeArgs) -> Result<Value> {
    let sys = load_system(&a.input)?;
    let res = stroboscopic_recurrence(&sys.hamiltonian, &sys.rho0, a.epsilon, a.t, a.cap)?;
    Ok(json!({
        "command": "strobe",
        "conventions": conventions(sys.hamiltonian.hbar(), Some(lambda_of(&sys)?)),
        "result": to_value(&res),
    }))
}

fn truncate_cmd(a: &TruncateArgs) -> Result<Value> {
    let sys = load_system(&a.input)?;
    let order = match a.order {
        OrderArg::Energy => LevelOrder::Energy,
        OrderArg::Population => LevelOrder::Population,
    };
    let n_keep = match (a.n, a.delta_target) {
        (Some(n), _) => n,
        (None, Some(target)) => choose_n_ordered(&sys.rho0, target, order)?,
        (None, None) => return Err(Error::BadParameter("give --n or --delta-target".into())),
    };
    let tr = truncate_ordered(&sys.rho0, n_keep, order)?;
    let corollary = match a.epsilon {
        None => Value::Null,
        Some(eps) => {
            let mode = match a.mode {
                ModeArg::Energy => CorollaryMode::Energy,
                ModeArg::Dimension => CorollaryMode::Dimension { t: a.t },
            };
            to_value(&corollary_bounds(&sys.hamiltonian, &tr, eps, mode)?)
        }
    };
    Ok(json!({
        "command": "truncate",
        "conventions": conventions(sys.hamiltonian.hbar(), Some(lambda_of(&sys)?)),
        "truncation": to_value(&TruncationReport::from(&tr)),
        "corollary": corollary,
    }))
}

fn verify_cmd(a: &VerifyArgs) -> Result<(Value, bool)> {
    let reports = run_suite(a.suite, a.seed)?;
    let passed = reports.iter().all(|r| r.passed);
    let skipped: usize = reports.iter().map(|r| r.skipped).sum();
    Ok((
        json!({
            "command": "verify",
            "seed": a.seed,
            "conventions": conventions(1.0, None),
            "skipped_instances": skipped,
            "passed": passed,
            "suites": to_value(&reports),
        }),
        passed,
    ))
}

fn geometry_cmd(g: &GeometryCommand) -> Result<Value> {
    Ok(match g {
        GeometryCommand::Sphere { n, r } => {
            json!({"command": "geometry sphere", "n": n, "r": r, "volume": sphere_ball_volume(*n, *r)?})
        }
        GeometryCommand::Tube { n, theta, length } => json!({
            "command": "geometry tube", "n": n, "theta": theta, "length": length,
            "volume": tube_volume(*n, *theta, *length)?,
        }),
        GeometryCommand::Torus { input } => {
            let sys = load_system(input)?;
            let (torus, levels) = torus_from_state_reduced(&sys.rho0)?;
            let ln_vol = ln_torus_volume(&torus);
            json!({
                "command": "geometry torus",
                "conventions": conventions(sys.hamiltonian.hbar(), Some(lambda_of(&sys)?)),
                "levels": levels,
                "radii": torus.radii(),
                "injectivity_radius": injectivity_radius(&torus),
                "volume": ln_vol.exp(),
                "log_volume": ln_vol,
            })
        }
        GeometryCommand::Oracle { input, point, r } => {
            let (space, perm) = MetricInstance::load(input)?;
            let res = metric_recurrence_oracle(&space, &perm, *point, *r)?;
            json!({"command": "geometry oracle", "ball": "open", "result": to_value(&res)})
        }
    })
}

fn emit(value: &Value, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize") + "\n";
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    configure_threads();
    let output = cli.output.as_deref();
    let outcome = match &cli.command {
        Command::Bounds(a) => bounds_cmd(a).map(|v| (v, true)),
        Command::Search(a) => search_cmd(a).map(|v| (v, true)),
        Command::Strobe(a) => strobe_cmd(a).map(|v| (v, true)),
        Command::Truncate(a) => truncate_cmd(a).map(|v| (v, true)),
        Command::Verify(a) => verify_cmd(a),
        Command::Geometry(g) => geometry_cmd(g).map(|v| (v, true)),
    };
    match outcome.and_then(|(v, ok)| emit(&v, output).map(|_| ok)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let code = exit_code(&e);
            let _ = emit(&error_json(&e), None);
            code
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
