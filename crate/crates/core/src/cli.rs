//! Batch front end: argument parsing, dispatch of the `solve`, `diagnose`,
//! `verify`, `bench` and `run` subcommands, and rendering of CSV and reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or usage
//! error, 3 runtime failure (unmet precondition, unsupported case, I/O).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, Config, ConfigError, Mode};
use crate::error::Error;
use crate::estimator::{
    check_against_reference, check_coordinate_martingale, check_mean_value, check_r_independence, estimate_grid,
    step_counts, CheckSettings, ConsistencyReport, PointStatus,
};
use crate::geometry::{Domain, Patch, Point, Shape, BOUNDARY_TOL};
use crate::oracle::{analytic_solution, fd_solve, regularity_report, BoundaryFunction, HarmonicPoly};
use crate::walk::WalkParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Environment variable read when `--seed` is absent.
pub const SEED_ENV: &str = "DIRICHLET_MC_SEED";

const DEFAULT_SUITE_N: u64 = 10_000;
const MARTINGALE_STEPS: u64 = 8;
const MEAN_VALUE_PROBES: usize = 64;
const FD_CELLS: f64 = 64.0;
const FD_TOL: f64 = 5e-4;

#[derive(Debug, Parser)]
#[command(name = "dirichlet-mc", version, about = "Random-walk Monte Carlo solver for the Laplace Dirichlet problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the solution at the configured points and write CSV.
    Solve(RunArgs),
    /// Classify boundary points by the exterior-ball criterion.
    Diagnose(RunArgs),
    /// Run consistency checks; without a config, runs the built-in suite.
    Verify(VerifyArgs),
    /// Step-count statistics over a grid of contraction factors and shells.
    Bench(RunArgs),
    /// Dispatch on the config's `mode` field (default `solve`).
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config file.
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// JSON config file.
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Root seed; overrides the config and the environment.
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Walks per point.
    #[arg(long)]
    pub n: Option<u64>,
    /// Contraction factor in (0,1).
    #[arg(long)]
    pub r: Option<f64>,
    /// Output path; the report goes to `<out>.report.txt`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; never changes any output.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) => EXIT_CONFIG,
            RunError::Runtime(_) | RunError::Io { .. } => EXIT_RUNTIME,
        }
    }
}

/// Text produced by one run: the primary output (CSV, or the verification
/// report) and a human-readable report.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub primary: String,
    pub report: String,
    pub passed: bool,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command, writing its outputs. Returns whether all checks passed.
pub fn execute(command: Command) -> Result<bool, RunError> {
    let (mode, path, overrides) = match command {
        Command::Solve(a) => (Some(Mode::Solve), Some(a.config), a.overrides),
        Command::Diagnose(a) => (Some(Mode::Diagnose), Some(a.config), a.overrides),
        Command::Bench(a) => (Some(Mode::Bench), Some(a.config), a.overrides),
        Command::Verify(a) => (Some(Mode::Verify), a.config, a.overrides),
        Command::Run(a) => (None, Some(a.config), a.overrides),
    };
    let config = match &path {
        Some(p) => Some(load_config(p, &overrides)?),
        None => None,
    };
    let mode = mode
        .or_else(|| config.as_ref().and_then(|c| c.mode))
        .unwrap_or(Mode::Solve);
    let out = overrides
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output.as_ref().map(PathBuf::from)));

    let pool = thread_pool(overrides.workers)?;
    let rendered = pool.install(|| match (&config, mode) {
        (Some(c), Mode::Solve) => solve(c),
        (Some(c), Mode::Diagnose) => diagnose(c),
        (Some(c), Mode::Verify) => verify(c),
        (Some(c), Mode::Bench) => bench(c),
        (None, _) => Ok(default_suite(
            overrides.n.unwrap_or(DEFAULT_SUITE_N),
            overrides.seed.unwrap_or(0),
        )),
    })?;
    emit(&rendered, out.as_deref(), mode == Mode::Verify)?;
    Ok(rendered.passed)
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, RunError> {
    if workers == Some(0) {
        return Err(RunError::Usage("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Usage(format!("cannot start worker pool: {e}")))
}

/// Reads and parses a config file, then applies command-line overrides.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<Config, RunError> {
    let text = fs::read(path).map_err(|e| {
        RunError::Usage(format!("cannot read config {}: {e}", path.display()))
    })?;
    let mut config = parse_config(&text)?;
    apply_overrides(&mut config, overrides)?;
    Ok(config)
}

/// Flag values replace config values; the result is re-validated.
pub fn apply_overrides(config: &mut Config, o: &Overrides) -> Result<(), ConfigError> {
    if let Some(seed) = o.seed {
        config.seed = seed;
    }
    if let Some(n) = o.n {
        config.n_samples = n;
        config.bench.n = n.max(1);
    }
    if let Some(r) = o.r {
        config.r = r;
    }
    config.validate()
}

fn emit(rendered: &Rendered, out: Option<&Path>, report_is_primary: bool) -> Result<(), RunError> {
    let io_err = |context: String| move |source| RunError::Io { context, source };
    match out {
        Some(path) => {
            fs::write(path, &rendered.primary).map_err(io_err(format!("writing {}", path.display())))?;
            if !report_is_primary {
                let mut report_path = path.as_os_str().to_owned();
                report_path.push(".report.txt");
                let report_path = PathBuf::from(report_path);
                fs::write(&report_path, &rendered.report)
                    .map_err(io_err(format!("writing {}", report_path.display())))?;
            }
        }
        None => {
            io::stdout()
                .write_all(rendered.primary.as_bytes())
                .map_err(io_err("writing stdout".into()))?;
            if !report_is_primary {
                io::stderr()
                    .write_all(rendered.report.as_bytes())
                    .map_err(io_err("writing stderr".into()))?;
            }
        }
    }
    Ok(())
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn coord_header(d: usize) -> String {
    (0..d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
}

fn coord_cells(p: &Point) -> String {
    p.coords().iter().map(|c| sci(*c)).collect::<Vec<_>>().join(",")
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn describe_domain(domain: &Domain) -> String {
    match domain.shape() {
        Shape::Ball { center, radius } => format!("ball center {} radius {radius}", fmt_vec(center)),
        Shape::AxisBox { lo, hi } => format!("box lo {} hi {}", fmt_vec(lo), fmt_vec(hi)),
        Shape::Polytope { halfspaces, vertices } => {
            format!("polytope with {} facets and {} vertices", halfspaces.len(), vertices.len())
        }
        Shape::Annulus { center, r_in, r_out } => {
            format!("annulus center {} radii {r_in} < |x - c| < {r_out}", fmt_vec(center))
        }
        Shape::PuncturedBall {
            center,
            radius,
            puncture,
        } => format!(
            "punctured ball center {} radius {radius} puncture {}",
            fmt_vec(center),
            fmt_vec(puncture)
        ),
    }
}

pub fn describe_boundary(f: &BoundaryFunction) -> String {
    match f {
        BoundaryFunction::Constant(c) => format!("constant {c}"),
        BoundaryFunction::Coordinate(j) => format!("coordinate x{j}"),
        BoundaryFunction::HarmonicPoly2D(p) => format!("harmonic polynomial {}", p.name()),
        BoundaryFunction::FourierCircle { a, b } => format!("fourier a {} b {}", fmt_vec(a), fmt_vec(b)),
        BoundaryFunction::PiecewiseLabel(patches) => {
            let parts: Vec<String> = patches.iter().map(|(p, v)| format!("{p}={v}")).collect();
            format!("piecewise {}", parts.join(" "))
        }
    }
}

fn report_header(config: &Config, params: &WalkParams, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dirichlet-mc {title}");
    let _ = writeln!(s, "domain:    {} (d = {}, diameter {})", describe_domain(&config.domain), config.domain.dim(), config.domain.diameter());
    let _ = writeln!(s, "boundary:  {}", describe_boundary(&config.boundary));
    let _ = writeln!(
        s,
        "walk:      r = {}, epsilon = {:e}, max_steps = {}",
        params.r(),
        params.epsilon(),
        params.max_steps()
    );
    let _ = writeln!(s, "sampling:  n = {}, seed = {}", config.n_samples, config.seed);
    s
}

/// Estimates the field at every configured point.
///
/// CSV columns: `x0..x{d-1},value,stderr,n,mean_steps,trunc_frac,status`, with
/// status one of `interior`, `interior_truncated` (more than 1% of walks hit
/// the step cap), `boundary` (exact data value) or `outside` (empty numbers).
pub fn solve(config: &Config) -> Result<Rendered, RunError> {
    if config.points.is_empty() {
        return Err(RunError::Usage("points: solve needs at least one evaluation point".into()));
    }
    let params = config.walk_params()?;
    let entries = estimate_grid(
        &config.domain,
        &config.boundary,
        &config.points,
        &params,
        config.n_samples,
        config.seed,
    )?;
    let d = config.domain.dim();
    let mut csv = format!("{},value,stderr,n,mean_steps,trunc_frac,status\n", coord_header(d));
    let (mut interior, mut boundary, mut outside, mut flagged) = (0, 0, 0, 0);
    let mut max_trunc: f64 = 0.0;
    for e in &entries {
        let coords = coord_cells(&e.point);
        match &e.status {
            PointStatus::Interior(est) => {
                interior += 1;
                max_trunc = max_trunc.max(est.truncation_fraction);
                let status = if est.flagged() {
                    flagged += 1;
                    "interior_truncated"
                } else {
                    "interior"
                };
                let _ = writeln!(
                    csv,
                    "{coords},{},{},{},{},{},{status}",
                    sci(est.mean),
                    sci(est.stderr),
                    est.n_samples,
                    sci(est.mean_steps),
                    sci(est.truncation_fraction)
                );
            }
            PointStatus::Boundary { value } => {
                boundary += 1;
                let _ = writeln!(csv, "{coords},{},{},0,{},{},boundary", sci(*value), sci(0.0), sci(0.0), sci(0.0));
            }
            PointStatus::Outside => {
                outside += 1;
                let _ = writeln!(csv, "{coords},,,0,,,outside");
            }
        }
    }
    let mut report = report_header(config, &params, "solve");
    let _ = writeln!(
        report,
        "points:    {} total, {interior} interior, {boundary} on the boundary, {outside} outside",
        entries.len()
    );
    let _ = writeln!(report, "largest truncation fraction: {max_trunc:e}");
    if flagged > 0 {
        let _ = writeln!(
            report,
            "warning: {flagged} point(s) had more than 1% truncated walks; raise max_steps or epsilon"
        );
    }
    Ok(Rendered {
        primary: csv,
        report,
        passed: true,
    })
}

/// Regularity table for the configured points, or the domain's landmark
/// boundary points when none are given.
///
/// CSV columns: `x0..x{d-1},patch,status,exterior_radius,barrier_at_v,barrier_min,mean_value_residual`.
pub fn diagnose(config: &Config) -> Result<Rendered, RunError> {
    let domain = &config.domain;
    let points = if config.points.is_empty() {
        domain.landmark_boundary_points()
    } else {
        config.points.clone()
    };
    let entries = regularity_report(domain, &points, config.seed)?;
    let d = domain.dim();
    let mut csv = format!(
        "{},patch,status,exterior_radius,barrier_at_v,barrier_min,mean_value_residual\n",
        coord_header(d)
    );
    let mut report = report_header(config, &config.walk_params()?, "diagnose");
    let _ = writeln!(report, "\n{:<40} {:<10} status", "boundary point", "patch");
    for e in &entries {
        let patch = domain.boundary_patch(e.point.coords());
        let radius = e.exterior_ball.as_ref().map(|b| sci(b.radius)).unwrap_or_default();
        let (at_v, min, resid) = match &e.barrier {
            Some(b) => (sci(b.value_at_v), sci(b.min_sampled_value), sci(b.mean_value_residual)),
            None => Default::default(),
        };
        let _ = writeln!(
            csv,
            "{},{patch},{},{radius},{at_v},{min},{resid}",
            coord_cells(&e.point),
            e.status
        );
        let _ = writeln!(report, "{:<40} {:<10} {}", fmt_vec(e.point.coords()), patch.to_string(), e.status);
    }
    let _ = writeln!(
        report,
        "\n\"unknown\" means no exterior-ball certificate was found; it does not assert irregularity."
    );
    Ok(Rendered {
        primary: csv,
        report,
        passed: true,
    })
}

/// One line of a verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Report(ConsistencyReport),
    Skipped(String),
}

fn run_check(name: String, result: crate::Result<ConsistencyReport>) -> Result<CheckLine, RunError> {
    let outcome = match result {
        Ok(r) => CheckOutcome::Report(r),
        Err(Error::Unsupported(why)) => CheckOutcome::Skipped(why),
        Err(e) => return Err(e.into()),
    };
    Ok(CheckLine { name, outcome })
}

fn render_checks(header: String, lines: &[CheckLine]) -> Rendered {
    let mut s = header;
    let mut passed = true;
    for line in lines {
        match &line.outcome {
            CheckOutcome::Report(r) => {
                passed &= r.pass;
                let _ = writeln!(
                    s,
                    "{}  {}: {} (max discrepancy {:.3e}, threshold {:.3e})",
                    if r.pass { "PASS" } else { "FAIL" },
                    line.name,
                    r.quantity,
                    r.max_discrepancy,
                    r.threshold
                );
                for v in &r.values {
                    let _ = writeln!(s, "      {:<48} {:.6} +/- {:.2e}", v.label, v.mean, v.stderr);
                }
            }
            CheckOutcome::Skipped(why) => {
                let _ = writeln!(s, "SKIP  {}: {why}", line.name);
            }
        }
    }
    let _ = writeln!(s, "{}", if passed { "all checks passed" } else { "verification FAILED" });
    Rendered {
        primary: s.clone(),
        report: s,
        passed,
    }
}

fn first_interior(config: &Config) -> Point {
    config
        .points
        .iter()
        .find(|p| config.domain.contains_raw(p) && config.domain.boundary_gap_raw(p) > BOUNDARY_TOL)
        .cloned()
        .unwrap_or_else(|| config.domain.reference_point())
}

fn fd_reference(domain: &Domain, f: &BoundaryFunction) -> crate::Result<crate::oracle::FdGrid> {
    let Shape::AxisBox { lo, hi } = domain.shape() else {
        return Err(Error::Unsupported("finite-difference reference needs a planar box".into()));
    };
    if domain.dim() != 2 {
        return Err(Error::Unsupported("finite-difference reference needs a planar box".into()));
    }
    let sides = [hi[0] - lo[0], hi[1] - lo[1]];
    let h = sides[0].min(sides[1]) / FD_CELLS;
    let ratio = sides[0].max(sides[1]) / h;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio > 4096.0 {
        return Err(Error::Unsupported("box sides are not commensurate with a 1/64 grid".into()));
    }
    fd_solve(domain, f, h, crate::oracle::fd::DEFAULT_FD_TOL)
}

/// Consistency checks for the configured problem at its first interior point.
pub fn verify(config: &Config) -> Result<Rendered, RunError> {
    let domain = &config.domain;
    let f = &config.boundary;
    let params = config.walk_params()?;
    let settings = CheckSettings::new(domain, f, params, config.n_samples, config.seed);
    let v = first_interior(config);
    let mut lines = Vec::new();

    lines.push(run_check(
        format!("martingale at {}", fmt_vec(v.coords())),
        check_coordinate_martingale(domain, &v, params.r(), config.n_samples, MARTINGALE_STEPS, config.seed),
    )?);

    let mut rs = vec![0.3, 0.5, 0.9, params.r()];
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    lines.push(run_check(
        format!("r-independence at {}", fmt_vec(v.coords())),
        check_r_independence(domain, f, &v, &rs, &settings),
    )?);

    let rho = 0.5 * domain.distance_raw(&v);
    lines.push(run_check(
        format!("mean value at {} (rho {rho:.4})", fmt_vec(v.coords())),
        check_mean_value(domain, f, &v, rho, MEAN_VALUE_PROBES, &settings),
    )?);

    let name = format!("closed form at {}", fmt_vec(v.coords()));
    if analytic_solution(domain, f, &v).is_some() {
        lines.push(run_check(
            name,
            check_against_reference(
                domain,
                f,
                std::slice::from_ref(&v),
                "closed form",
                |x| analytic_solution(domain, f, x).ok_or_else(|| Error::Unsupported("no closed form".into())),
                0.0,
                &settings,
            ),
        )?);
    } else {
        lines.push(CheckLine {
            name,
            outcome: CheckOutcome::Skipped("no closed-form solution for this domain and data".into()),
        });
    }

    let fd = fd_reference(domain, f);
    lines.push(run_check(
        format!("finite differences at {}", fmt_vec(v.coords())),
        fd.and_then(|grid| {
            check_against_reference(
                domain,
                f,
                std::slice::from_ref(&v),
                "finite differences",
                |x| grid.interpolate(x),
                FD_TOL,
                &settings,
            )
        }),
    )?);

    Ok(render_checks(report_header(config, &params, "verify"), &lines))
}

/// Built-in verification suite on reference problems with known answers.
pub fn default_suite(n: u64, seed: u64) -> Rendered {
    match default_suite_lines(n, seed) {
        Ok(lines) => render_checks(format!("dirichlet-mc verify (built-in suite, n = {n}, seed = {seed})\n"), &lines),
        Err(e) => Rendered {
            primary: format!("error: {e}\nverification FAILED\n"),
            report: format!("error: {e}\n"),
            passed: false,
        },
    }
}

fn default_suite_lines(n: u64, seed: u64) -> Result<Vec<CheckLine>, RunError> {
    let p = |c: &[f64]| Point::from_vec(c.to_vec());
    let disk = Domain::ball(vec![0.0, 0.0], 1.0)?;
    let ball3 = Domain::ball(vec![0.0; 3], 1.0)?;
    let square = Domain::axis_box(vec![0.0, 0.0], vec![1.0, 1.0])?;
    let interval = Domain::axis_box(vec![0.0], vec![1.0])?;
    let annulus = Domain::annulus(vec![0.0, 0.0], 0.5, 1.0)?;
    let quad = BoundaryFunction::HarmonicPoly2D(HarmonicPoly::X2MinusY2);
    let settings = |dom: &Domain, f: &BoundaryFunction| CheckSettings::new(dom, f, WalkParams::for_domain(dom), n, seed);
    let mut lines = Vec::new();

    for (dom, v) in [(&disk, p(&[0.3, 0.0])), (&ball3, p(&[0.3, 0.0, 0.0]))] {
        lines.push(run_check(
            format!("martingale on unit ball d={}", dom.dim()),
            check_coordinate_martingale(dom, &v, 0.5, n, MARTINGALE_STEPS, seed),
        )?);
    }

    lines.push(run_check(
        "r-independence on unit square, x^2-y^2".into(),
        check_r_independence(&square, &quad, &p(&[0.3, 0.6]), &[0.3, 0.5, 0.9], &settings(&square, &quad)),
    )?);

    let fourier = BoundaryFunction::FourierCircle {
        a: vec![0.0, 0.0, 1.0],
        b: vec![],
    };
    lines.push(run_check(
        "mean value on unit disk, cos 2theta".into(),
        check_mean_value(&disk, &fourier, &p(&[0.2, 0.1]), 0.3, MEAN_VALUE_PROBES, &settings(&disk, &fourier)),
    )?);

    let probes: Vec<Point> = [[0.25, 0.25], [0.75, 0.25], [0.5, 0.5], [0.25, 0.75], [0.75, 0.75]]
        .iter()
        .map(|c| p(c))
        .collect();
    let grid = fd_reference(&square, &quad)?;
    lines.push(run_check(
        "finite differences on unit square, x^2-y^2".into(),
        check_against_reference(&square, &quad, &probes, "finite differences", |x| grid.interpolate(x), FD_TOL, &settings(&square, &quad)),
    )?);

    let cases = [
        (
            "interval, f(0)=0 f(1)=1",
            &interval,
            BoundaryFunction::PiecewiseLabel(vec![
                (Patch::Face { axis: 0, upper: false }, 0.0),
                (Patch::Face { axis: 0, upper: true }, 1.0),
            ]),
            vec![p(&[0.1]), p(&[0.5]), p(&[0.9])],
        ),
        (
            "annulus, inner 0 outer 1",
            &annulus,
            BoundaryFunction::PiecewiseLabel(vec![(Patch::Inner, 0.0), (Patch::Outer, 1.0)]),
            vec![p(&[0.7, 0.0]), p(&[0.0, -0.6])],
        ),
    ];
    for (name, dom, f, pts) in cases {
        lines.push(run_check(
            format!("closed form on {name}"),
            check_against_reference(
                dom,
                &f,
                &pts,
                "closed form",
                |x| analytic_solution(dom, &f, x).ok_or_else(|| Error::Unsupported("no closed form".into())),
                0.0,
                &settings(dom, &f),
            ),
        )?);
    }
    Ok(lines)
}

/// Exit-time statistics for each `(r, epsilon)` pair of the bench grid, from
/// the first interior point.
///
/// CSV columns: `r,epsilon,n,mean_steps,median_steps,p90_steps,max_steps,trunc_frac`.
pub fn bench(config: &Config) -> Result<Rendered, RunError> {
    let domain = &config.domain;
    let params = config.walk_params()?;
    let v = first_interior(config);
    let n = config.bench.n;
    let mut csv = String::from("r,epsilon,n,mean_steps,median_steps,p90_steps,max_steps,trunc_frac\n");
    let mut report = report_header(config, &params, "bench");
    let _ = writeln!(report, "start:     {} ({} walks per cell)\n", fmt_vec(v.coords()), n);
    let _ = writeln!(report, "{:>6} {:>10} {:>12} {:>8} {:>8} {:>8} {:>10}", "r", "eps", "mean", "median", "p90", "max", "trunc");
    for &r in &config.bench.r_values {
        for &frac in &config.bench.epsilon_fractions {
            let eps = frac * domain.diameter();
            let p = WalkParams::new(r, eps, params.max_steps())?;
            let mut counts = step_counts(domain, &v, &p, n, config.seed)?;
            let truncated = counts.iter().filter(|(_, t)| *t).count();
            counts.sort_unstable();
            let steps: Vec<u64> = counts.iter().map(|(s, _)| *s).collect();
            let mean = steps.iter().map(|&s| s as f64).sum::<f64>() / n as f64;
            let quantile = |q: f64| steps[((q * (n - 1) as f64).round() as usize).min(steps.len() - 1)];
            let (median, p90, max) = (quantile(0.5), quantile(0.9), steps[steps.len() - 1]);
            let trunc = truncated as f64 / n as f64;
            let _ = writeln!(csv, "{},{},{n},{},{median},{p90},{max},{}", sci(r), sci(eps), sci(mean), sci(trunc));
            let _ = writeln!(report, "{r:>6} {eps:>10.2e} {mean:>12.2} {median:>8} {p90:>8} {max:>8} {trunc:>10.2e}");
        }
    }
    Ok(Rendered {
        primary: csv,
        report,
        passed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> Config {
        parse_config(text.as_bytes()).unwrap()
    }

    const DISK: &str = r#"{
        "domain": {"type": "ball", "center": [0, 0], "radius": 1},
        "boundary": {"type": "coordinate", "index": 0},
        "sampling": {"n_samples": 2000, "seed": 5},
        "points": [[0.1, 0.2], [1.0, 0.0], [2.0, 0.0], [0.0, -0.5]]
    }"#;

    #[test]
    fn solve_rows_and_statuses() {
        let out = solve(&config(DISK)).unwrap();
        let lines: Vec<&str> = out.primary.lines().collect();
        assert_eq!(lines[0], "x0,x1,value,stderr,n,mean_steps,trunc_frac,status");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with(",interior"));
        assert!(lines[1].contains(",2000,"));
        assert_eq!(
            lines[2],
            "1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,0,0.0000000000000000e0,0.0000000000000000e0,boundary"
        );
        assert!(lines[3].ends_with(",,,0,,,outside"));
        assert!(!out.report.contains("warning"));
    }

    #[test]
    fn solve_is_independent_of_worker_count() {
        let c = config(DISK);
        let run = |w| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .unwrap()
                .install(|| solve(&c).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    #[test]
    fn truncation_is_flagged() {
        let text = DISK.replace("\"sampling\"", "\"walk\": {\"max_steps\": 3}, \"sampling\"");
        let out = solve(&config(&text)).unwrap();
        assert!(out.primary.lines().nth(1).unwrap().ends_with(",interior_truncated"));
        assert!(out.report.contains("warning"));
    }

    #[test]
    fn solve_without_points_is_a_config_error() {
        let c = config(r#"{"domain": {"type": "ball", "center": [0, 0], "radius": 1}, "boundary": {"type": "constant", "value": 1}}"#);
        assert_eq!(solve(&c).unwrap_err().exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = config(DISK);
        let o = Overrides {
            seed: Some(77),
            n: Some(10),
            r: Some(0.25),
            ..Default::default()
        };
        apply_overrides(&mut c, &o).unwrap();
        assert_eq!((c.seed, c.n_samples, c.r), (77, 10, 0.25));
        let bad = Overrides {
            r: Some(1.5),
            ..Default::default()
        };
        let err = apply_overrides(&mut c, &bad).unwrap_err().to_string();
        assert!(err.contains("walk.r"), "{err}");
    }

    #[test]
    fn diagnose_punctured_disk() {
        let c = config(
            r#"{"domain": {"type": "punctured_ball", "center": [0, 0], "radius": 1, "puncture": [0, 0]},
                "boundary": {"type": "piecewise", "patches": [{"patch": "outer", "value": 1}, {"patch": "puncture", "value": 0}]}}"#,
        );
        let out = diagnose(&c).unwrap();
        let rows: Vec<&str> = out.primary.lines().skip(1).collect();
        assert!(rows.iter().any(|r| r.contains(",puncture,unknown,")));
        let outer: Vec<_> = rows.iter().filter(|r| r.contains(",outer,")).collect();
        assert!(!outer.is_empty());
        assert!(outer.iter().all(|r| r.contains("regular (Poincaré)")));
    }

    #[test]
    fn diagnose_rejects_interior_points() {
        let err = diagnose(&config(DISK)).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_RUNTIME);
    }

    #[test]
    fn bench_grid_rows() {
        let text = DISK.replace(
            "\"points\"",
            "\"bench\": {\"r_values\": [0.5, 0.9], \"epsilons\": [1e-2, 1e-3], \"n\": 200}, \"points\"",
        );
        let out = bench(&config(&text)).unwrap();
        assert_eq!(out.primary.lines().count(), 1 + 4);
    }

    #[test]
    fn verify_configured_box() {
        let c = config(
            r#"{"domain": {"type": "box", "lo": [0, 0], "hi": [1, 1]},
                "boundary": {"type": "harmonic_poly", "kind": "xy"},
                "sampling": {"n_samples": 4000, "seed": 3},
                "points": [[0.4, 0.3]]}"#,
        );
        let out = verify(&c).unwrap();
        assert!(out.passed, "{}", out.primary);
        assert_eq!(out.primary.matches("PASS").count(), 5, "{}", out.primary);
    }

    #[test]
    fn verify_skips_unsupported_checks() {
        let c = config(
            r#"{"domain": {"type": "ball", "center": [0, 0, 0, 0], "radius": 1},
                "boundary": {"type": "constant", "value": 2},
                "sampling": {"n_samples": 200}}"#,
        );
        let out = verify(&c).unwrap();
        assert!(out.passed, "{}", out.primary);
        assert!(out.primary.contains("SKIP"));
    }
}
