//! The `patrolmap` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{parse_config, parse_pair, RunConfig};
use super::raster::{export_field, load_field, load_field_on, load_raster, FieldFormat};
use super::text::{write_front_rows, write_rows, write_trajectories};
use crate::eikonal::solve_eikonal;
use crate::error::Error;
use crate::grid::{sample_bilinear, DomainMask, Point, Problem, ScalarField};
use crate::multiobjective::{compute_r, non_dominated, profit_sharp, scalarized_cost, solve_model_a, FrontPoint, ModelAOutput};
use crate::planning::{
    build_scenario, candidate_grid, high_value_region, optimize_station, optimize_weights, region_stats,
    region_stats_masked, terrain_problem, RegionStats, ScenarioSpec, Summary, DEFAULT_EPSILON,
};
use crate::terminated::{solve_model_g, solve_terminated};
use crate::trajectory::{model_g_paths, trace_descent, Trajectory};

#[derive(Parser, Debug)]
#[command(
    name = "patrolmap",
    version,
    about = "Expected-profit maps for illegal extraction under aerial and ground patrols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a scenario and export its input fields
    Scenario(Common),
    /// Aerial-patrol profit map, pristine statistics and the linearized bound
    SolveA(Common),
    /// Ground-patrol profit bracket and pristine statistics
    SolveG(Common),
    /// Trace optimal paths from the given points
    Trace(TraceArgs),
    /// Grid search over single patrol-station locations
    OptimizeStation(StationArgs),
    /// Grid search over the weights of two patrol stations
    OptimizeWeights(WeightArgs),
    /// Pristine statistics of an exported profit map
    Stats(StatsArgs),
    /// Export fields, fronts and paths for plotting
    ExportFigureData(TraceArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Run configuration of `key = value` lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario name
    #[arg(long)]
    scenario: Option<String>,
    /// Elevation raster; builds a terrain problem instead of a scenario
    #[arg(long)]
    elevation: Option<PathBuf>,
    /// Cells per axis
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nlambda: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    /// Patrol budget E
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// High-value region tolerance
    #[arg(long)]
    epsilon: Option<f64>,
    /// Profit threshold for the pristine region
    #[arg(long = "p-tilde", allow_negative_numbers = true)]
    p_tilde: Option<f64>,
    #[arg(long, value_parser = point_arg)]
    station: Option<Point>,
    /// Station weights `w1,w2`
    #[arg(long, value_parser = point_arg)]
    weights: Option<Point>,
    /// Start point `x,y`; repeatable
    #[arg(long = "point", value_parser = point_arg)]
    points: Vec<Point>,
    /// a, g or both
    #[arg(long)]
    model: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// text or packed
    #[arg(long, value_parser = format_arg)]
    format: Option<FieldFormat>,
    /// Worker threads; overrides HJB_WORKERS
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.5)]
    step_factor: f64,
}

#[derive(Args, Debug)]
struct StationArgs {
    #[command(flatten)]
    common: Common,
    /// Candidates per axis over the unit square
    #[arg(long, default_value_t = 11)]
    candidates: usize,
    /// A_p difference still counted as a tie
    #[arg(long, default_value_t = 1e-9)]
    tie_tol: f64,
}

#[derive(Args, Debug)]
struct WeightArgs {
    #[command(flatten)]
    common: Common,
    /// Weight steps; w1 runs over N_w + 1 values
    #[arg(long, default_value_t = 100)]
    nw: usize,
    #[arg(long, default_value_t = 1e-9)]
    tie_tol: f64,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    profit: PathBuf,
    #[arg(long)]
    benefit: PathBuf,
    /// Field whose nonzero points are inside; all points count when absent
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long = "p-tilde", allow_negative_numbers = true, default_value_t = 0.0)]
    p_tilde: f64,
}

fn point_arg(s: &str) -> Result<Point, String> {
    parse_pair(s).map(|(x, y)| Point::new(x, y))
}

fn format_arg(s: &str) -> Result<FieldFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownScenario(_) | Error::InvalidParameter(_) | Error::Parse { .. } => CliError::Usage(e.to_string()),
            e => CliError::Run(e),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the CLI with process stdout/stderr and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`run_cli`], writing reports to `out` and diagnostics to `err`.
/// Exit codes: 0 success, 1 usage error, 2 solver or I/O error.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "usage error: {m}");
            1
        }
        Err(CliError::Run(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult<()> {
    let common = match &cmd {
        Command::Scenario(c) | Command::SolveA(c) | Command::SolveG(c) => Some(c),
        Command::Trace(t) | Command::ExportFigureData(t) => Some(&t.common),
        Command::OptimizeStation(s) => Some(&s.common),
        Command::OptimizeWeights(w) => Some(&w.common),
        Command::Stats(_) => None,
    };
    let cfg = match common {
        Some(c) => resolve(c)?,
        None => RunConfig::default(),
    };
    let workers = cfg.workers.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?;
    // stdout locks are not Send, so reports are buffered inside the pool
    let mut buf: Vec<u8> = Vec::new();
    let sink: &mut Vec<u8> = &mut buf;
    let res = pool.install(move || {
        let out: &mut dyn Write = sink;
        match cmd {
        Command::Scenario(_) => cmd_scenario(&cfg, out),
        Command::SolveA(_) => cmd_solve_a(&cfg, out).map(|_| ()),
        Command::SolveG(_) => cmd_solve_g(&cfg, out),
        Command::Trace(t) => cmd_trace(&cfg, t.step_factor, out),
        Command::ExportFigureData(t) => cmd_export(&cfg, t.step_factor, out),
        Command::OptimizeStation(s) => cmd_station(&cfg, s.candidates, s.tie_tol, out),
        Command::OptimizeWeights(w) => cmd_weights(&cfg, w.nw, w.tie_tol, out),
        Command::Stats(s) => cmd_stats(&s, out),
        }
    });
    out.write_all(&buf).map_err(|e| CliError::Run(Error::io(std::path::Path::new("<stdout>"), e)))?;
    res
}

/// Config file, then `HJB_WORKERS`, then flags.
fn resolve(c: &Common) -> CliResult<RunConfig> {
    let file = match &c.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    let env_workers = match std::env::var("HJB_WORKERS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("HJB_WORKERS must be a count, got `{v}`")))?,
        ),
        Err(_) => None,
    };
    let env = RunConfig {
        workers: env_workers,
        ..RunConfig::default()
    };
    let flags = RunConfig {
        scenario: c.scenario.clone(),
        elevation: c.elevation.clone(),
        n: c.n,
        n_lambda: c.nlambda,
        n_b: c.nb,
        budget: c.budget,
        gamma: c.gamma,
        epsilon: c.epsilon,
        p_tilde: c.p_tilde,
        model: c.model.clone(),
        out: c.out.clone(),
        points: c.points.clone(),
        station: c.station,
        weights: c.weights.map(|p| (p.x, p.y)),
        workers: c.workers,
        format: c.format,
    };
    Ok(file.overridden_by(env).overridden_by(flags))
}

struct Setup {
    problem: Problem,
    spec: Option<ScenarioSpec>,
    n_lambda: usize,
    n_b: usize,
    epsilon: f64,
}

fn scenario_spec(cfg: &RunConfig) -> CliResult<ScenarioSpec> {
    let name = cfg
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::Usage("give --scenario or --elevation".into()))?;
    let mut spec = ScenarioSpec::named(name)?;
    if let Some(n) = cfg.n {
        spec.n = n;
    }
    if let Some(k) = cfg.n_lambda {
        spec = spec.with_lambda_steps(k);
    }
    if let Some(b) = cfg.n_b {
        spec.n_b = b;
    }
    if let Some(e) = cfg.budget {
        spec.budget = e;
    }
    if let Some(g) = cfg.gamma {
        spec.gamma = g;
    }
    if let Some(p) = cfg.p_tilde {
        spec.p_tilde = p;
    }
    if let Some(s) = cfg.station {
        spec.station = s;
    }
    if let Some(w) = cfg.weights {
        spec.weights = w;
    }
    Ok(spec)
}

fn setup(cfg: &RunConfig) -> CliResult<Setup> {
    let epsilon = cfg.epsilon.unwrap_or(DEFAULT_EPSILON);
    if let Some(path) = &cfg.elevation {
        let budget = cfg
            .budget
            .ok_or_else(|| CliError::Usage("--budget is required with --elevation".into()))?;
        let raster = load_raster(path)?;
        let problem = terrain_problem(&raster, budget, cfg.gamma.unwrap_or(1.0), cfg.p_tilde.unwrap_or(0.0))?;
        let n_lambda = cfg.n_lambda.unwrap_or(21);
        return Ok(Setup {
            problem,
            spec: None,
            n_lambda,
            n_b: cfg.n_b.unwrap_or(n_lambda),
            epsilon,
        });
    }
    let spec = scenario_spec(cfg)?;
    let problem = build_scenario(&spec)?;
    Ok(Setup {
        problem,
        n_lambda: spec.n_lambda,
        n_b: spec.n_b,
        spec: Some(spec),
        epsilon,
    })
}

struct Output {
    dir: PathBuf,
    format: FieldFormat,
}

impl Output {
    fn new(cfg: &RunConfig) -> CliResult<Self> {
        let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Output {
            dir,
            format: cfg.format.unwrap_or(FieldFormat::Text),
        })
    }

    fn field(&self, name: &str, f: &ScalarField) -> CliResult<()> {
        let p = self.dir.join(format!("{name}.{}", self.format.extension()));
        export_field(f, &p, self.format)?;
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

fn bool_field(mask: &DomainMask, b: &[bool]) -> ScalarField {
    ScalarField::new(*mask.grid(), b.iter().map(|&v| f64::from(u8::from(v))).collect()).expect("grid-sized")
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn stats_lines(prefix: &str, s: &RegionStats) -> Vec<String> {
    vec![
        format!("{prefix}A_p={}", pct(s.a_p)),
        format!("{prefix}V_p={}", pct(s.v_p)),
        format!("{prefix}P_max={:.6}", s.p_max),
    ]
}

fn emit(out: &mut dyn Write, lines: &[String]) {
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
}

fn cmd_scenario(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let s = setup(cfg)?;
    let o = Output::new(cfg)?;
    let p = &s.problem;
    o.field("benefit", &p.benefit)?;
    o.field("psi", &p.psi)?;
    o.field("speed", &p.speed)?;
    o.field("cost", &p.cost)?;
    o.field("mask", &p.mask.to_field())?;
    let g = p.grid;
    let budget = crate::grid::integrate_field(&p.psi, &p.mask, s.spec.as_ref().map_or(1.0, |sp| sp.gamma))?;
    emit(
        out,
        &[
            format!("scenario={}", s.spec.as_ref().map_or("terrain-raster", |sp| sp.name.as_str())),
            format!("nx={}", g.nx()),
            format!("ny={}", g.ny()),
            format!("inside={}", p.mask.inside_count()),
            format!("budget={budget:.10}"),
        ],
    );
    Ok(())
}

fn cmd_solve_a(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<(Setup, ScalarField, ModelAOutput)> {
    let s = setup(cfg)?;
    let o = Output::new(cfg)?;
    let p = &s.problem;
    let r = compute_r(p)?;
    let a = solve_model_a(p, &r, s.n_lambda, &cfg.points)?;
    let sharp = profit_sharp(p, &r, s.n_b)?;
    let stats = region_stats(&a.profit.p_a, &p.benefit, &p.mask, p.p_tilde)?;
    let sharp_stats = region_stats(&sharp, &p.benefit, &p.mask, p.p_tilde)?;
    let hv = high_value_region(&a.profit.p_a, &r, &p.mask, s.epsilon)?;
    let hv_share = hv.iter().filter(|&&b| b).count() as f64 / p.mask.inside_count() as f64;
    o.field("p_a", &a.profit.p_a)?;
    o.field("r", &r)?;
    o.field("argmax_lambda", &a.profit.argmax_lambda())?;
    o.field("p_sharp", &sharp)?;
    o.field("lambda_gap", &a.lambda_gap)?;
    o.field("pristine_a", &bool_field(&p.mask, &stats.pristine))?;
    o.field("high_value", &bool_field(&p.mask, &hv))?;
    o.field("benefit", &p.benefit)?;
    o.field("psi", &p.psi)?;
    o.field("mask", &p.mask.to_field())?;
    let gap = a.lambda_gap.values().iter().copied().fold(0.0, f64::max);
    let mut lines = vec!["model=A".to_string(), format!("n_lambda={}", s.n_lambda)];
    lines.extend(stats_lines("", &stats));
    lines.extend(stats_lines("sharp_", &sharp_stats));
    lines.push(format!("epsilon={}", s.epsilon));
    lines.push(format!("high_value_share={}", pct(hv_share)));
    lines.push(format!("lambda_gap={gap:.6e}"));
    lines.push(format!("p_tilde={}", p.p_tilde));
    emit(out, &lines);
    write_summary(&o, &lines)?;
    Ok((s, r, a))
}

fn write_summary(o: &Output, lines: &[String]) -> CliResult<()> {
    let p = o.path("summary.txt");
    std::fs::write(&p, lines.join("\n") + "\n").map_err(|e| Error::io(&p, e))?;
    Ok(())
}

fn cmd_solve_g(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let s = setup(cfg)?;
    let o = Output::new(cfg)?;
    let p = &s.problem;
    let r = compute_r(p)?;
    let br = solve_model_g(p, &r, s.n_b)?;
    let mid = br.midpoint();
    let stats = region_stats(&mid, &p.benefit, &p.mask, p.p_tilde)?;
    let uncertain = br.uncertain_set(&p.mask, p.p_tilde);
    let unc_share = uncertain.iter().filter(|&&b| b).count() as f64 / p.mask.inside_count() as f64;
    let conservative = br.conservative_pristine(&p.mask, p.p_tilde);
    let cons_share = conservative.iter().filter(|&&b| b).count() as f64 / p.mask.inside_count() as f64;
    o.field("p_g_minus", &br.p_g_minus)?;
    o.field("p_g_plus", &br.p_g_plus)?;
    o.field("p_g_mid", &mid)?;
    o.field("pristine_g", &bool_field(&p.mask, &stats.pristine))?;
    o.field("r", &r)?;
    let mut lines = vec!["model=G".to_string(), format!("n_b={}", br.n_b)];
    lines.extend(stats_lines("", &stats));
    lines.push(format!("conservative_A_p={}", pct(cons_share)));
    lines.push(format!("uncertain_share={}", pct(unc_share)));
    emit(out, &lines);
    Ok(())
}

fn wants(cfg: &RunConfig, model: &str) -> CliResult<bool> {
    match cfg.model.as_deref().unwrap_or("a") {
        "a" | "A" => Ok(model == "a"),
        "g" | "G" => Ok(model == "g"),
        "both" => Ok(true),
        m => Err(CliError::Usage(format!("unknown model `{m}`, use a, g or both"))),
    }
}

/// The four characteristic Model A paths from each probe point.
fn model_a_paths(
    s: &Setup,
    r: &ScalarField,
    a: &ModelAOutput,
    points: &[Point],
    step_factor: f64,
    out: &mut dyn Write,
) -> CliResult<Vec<(String, Trajectory)>> {
    let p = &s.problem;
    let mut paths = Vec::new();
    for (pi, &x0) in points.iter().enumerate() {
        let b0 = sample_bilinear(&p.benefit, x0)?;
        let r0 = sample_bilinear(r, x0)?;
        let samples = &a.probes[pi];
        let best = samples
            .iter()
            .enumerate()
            .fold(None::<(usize, f64)>, |acc, (k, fp)| {
                let v = fp.payoff(b0);
                match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((k, v)),
                }
            })
            .map(|(k, _)| samples[k].lambda)
            .unwrap_or(0.0);
        let roles = [("time", 0.0), ("detection", 1.0), ("sharp", b0 / (b0 + 1.0)), ("argmax", best)];
        for (role, lam) in roles {
            let kl = scalarized_cost(&p.psi, &p.cost, lam)?;
            let u = solve_eikonal(&p.mask, &p.speed, &kl)?.u;
            let t = trace_descent(&p.mask, &u, &p.speed, x0, step_factor)?.with_functionals(&p.psi, &p.cost)?;
            let (j1, j2) = (*t.j1.last().unwrap(), *t.j2.last().unwrap());
            let payoff = b0 * (-j1).exp() - j2 - r0;
            emit(
                out,
                &[format!(
                    "path point={pi} role={role} lambda={lam:.6} J1={j1:.6} J2={j2:.6} payoff={payoff:.6} vertices={} termination={}",
                    t.len(),
                    t.termination.as_str()
                )],
            );
            paths.push((format!("point={pi} role={role} lambda={lam:.6}"), t));
        }
    }
    Ok(paths)
}

fn model_g_trace(s: &Setup, points: &[Point], step_factor: f64, out: &mut dyn Write) -> CliResult<Vec<(String, Trajectory)>> {
    let p = &s.problem;
    let r = compute_r(p)?;
    let uk = solve_eikonal(&p.mask, &p.speed, &p.cost)?.u;
    let mut paths = Vec::new();
    for (pi, &x0) in points.iter().enumerate() {
        let b0 = sample_bilinear(&p.benefit, x0)?;
        let sol = solve_terminated(p, &r, b0)?;
        let pre = trace_descent(&p.mask, &sol.u_bar, &p.speed, x0, step_factor)?;
        let n = pre.len();
        let detections: Vec<Point> = if n >= 4 {
            [n / 4, n / 2, 3 * n / 4].iter().map(|&i| pre.points[i]).collect()
        } else {
            Vec::new()
        };
        let (pre, post) = model_g_paths(&p.mask, &p.speed, &sol, &uk, x0, &detections, step_factor)?;
        let pre = pre.with_functionals(&p.psi, &p.cost)?;
        emit(
            out,
            &[format!(
                "path point={pi} role=pre-detection vertices={} termination={}",
                pre.len(),
                pre.termination.as_str()
            )],
        );
        paths.push((format!("point={pi} role=pre-detection"), pre));
        for (di, t) in post.into_iter().enumerate() {
            let t = t.with_functionals(&p.psi, &p.cost)?;
            emit(
                out,
                &[format!(
                    "path point={pi} role=post-detection-{di} vertices={} termination={}",
                    t.len(),
                    t.termination.as_str()
                )],
            );
            paths.push((format!("point={pi} role=post-detection-{di}"), t));
        }
    }
    Ok(paths)
}

fn require_points(cfg: &RunConfig) -> CliResult<()> {
    if cfg.points.is_empty() {
        return Err(CliError::Usage("give at least one --point x,y".into()));
    }
    Ok(())
}

fn cmd_trace(cfg: &RunConfig, step_factor: f64, out: &mut dyn Write) -> CliResult<()> {
    require_points(cfg)?;
    let (do_a, do_g) = (wants(cfg, "a")?, wants(cfg, "g")?);
    let s = setup(cfg)?;
    let o = Output::new(cfg)?;
    if do_a {
        let p = &s.problem;
        let r = compute_r(p)?;
        let a = solve_model_a(p, &r, s.n_lambda, &cfg.points)?;
        let paths = model_a_paths(&s, &r, &a, &cfg.points, step_factor, out)?;
        write_trajectories(&o.path("trajectories_a.txt"), &paths)?;
    }
    if do_g {
        let paths = model_g_trace(&s, &cfg.points, step_factor, out)?;
        write_trajectories(&o.path("trajectories_g.txt"), &paths)?;
    }
    Ok(())
}

fn cmd_export(cfg: &RunConfig, step_factor: f64, out: &mut dyn Write) -> CliResult<()> {
    let (do_a, do_g) = (wants(cfg, "a")?, wants(cfg, "g")?);
    let (s, r, a) = cmd_solve_a(cfg, out)?;
    let o = Output::new(cfg)?;
    let p = &s.problem;
    for (pi, &x0) in cfg.points.iter().enumerate() {
        let b0 = sample_bilinear(&p.benefit, x0)?;
        let r0 = sample_bilinear(&r, x0)?;
        let samples: &[FrontPoint] = &a.probes[pi];
        write_front_rows(&o.path(&format!("lambda_payoff_{pi}.txt")), samples, b0, r0)?;
        write_front_rows(&o.path(&format!("front_{pi}.txt")), &non_dominated(samples), b0, r0)?;
    }
    if !cfg.points.is_empty() {
        if do_a {
            let paths = model_a_paths(&s, &r, &a, &cfg.points, step_factor, out)?;
            write_trajectories(&o.path("trajectories_a.txt"), &paths)?;
        }
        if do_g {
            let paths = model_g_trace(&s, &cfg.points, step_factor, out)?;
            write_trajectories(&o.path("trajectories_g.txt"), &paths)?;
        }
    }
    Ok(())
}

fn summary_line(prefix: String, s: &Summary) -> String {
    format!("{prefix} A_p={} V_p={} P_max={:.6}", pct(s.a_p), pct(s.v_p), s.p_max)
}

fn searchable_spec(cfg: &RunConfig) -> CliResult<ScenarioSpec> {
    if cfg.elevation.is_some() {
        return Err(CliError::Usage("searches run on built-in scenarios only".into()));
    }
    scenario_spec(cfg)
}

fn cmd_station(cfg: &RunConfig, n: usize, tie_tol: f64, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = cfg.clone();
    cfg.scenario.get_or_insert_with(|| "example3".into());
    let spec = searchable_spec(&cfg)?;
    if n == 0 {
        return Err(CliError::Usage("--candidates must be positive".into()));
    }
    let o = Output::new(&cfg)?;
    let res = optimize_station(&spec, &candidate_grid(n), tie_tol)?;
    let mut rows = Vec::new();
    for (c, s) in &res.candidates {
        emit(out, &[summary_line(format!("candidate x={:.4} y={:.4}", c.x, c.y), s)]);
        rows.push(vec![c.x, c.y, s.a_p, s.v_p, s.p_max]);
    }
    write_rows(&o.path("candidates.txt"), Some("x y A_p V_p P_max"), &rows)?;
    for &i in &res.best {
        let (c, s) = &res.candidates[i];
        emit(out, &[summary_line(format!("best x={:.4} y={:.4}", c.x, c.y), s)]);
    }
    Ok(())
}

fn cmd_weights(cfg: &RunConfig, nw: usize, tie_tol: f64, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = cfg.clone();
    cfg.scenario.get_or_insert_with(|| "example4".into());
    let spec = searchable_spec(&cfg)?;
    let o = Output::new(&cfg)?;
    let res = optimize_weights(&spec, nw, tie_tol)?;
    let mut rows = Vec::new();
    for (w, s) in &res.candidates {
        emit(out, &[summary_line(format!("candidate w1={:.4} w2={:.4}", w.0, w.1), s)]);
        rows.push(vec![w.0, w.1, s.a_p, s.v_p, s.p_max]);
    }
    write_rows(&o.path("weights.txt"), Some("w1 w2 A_p V_p P_max"), &rows)?;
    for &i in &res.best {
        let (w, s) = &res.candidates[i];
        emit(out, &[summary_line(format!("best w1={:.4} w2={:.4}", w.0, w.1), s)]);
    }
    Ok(())
}

fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> CliResult<()> {
    let p = load_field(&a.profit)?;
    let b = load_field_on(&a.benefit, p.grid())?;
    let inside: Vec<bool> = match &a.mask {
        Some(m) => load_field_on(m, p.grid())?.values().iter().map(|&v| v != 0.0).collect(),
        None => vec![true; p.values().len()],
    };
    let s = region_stats_masked(p.values(), b.values(), &inside, a.p_tilde)?;
    emit(out, &stats_lines("", &s));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run_cli_with(std::iter::once("patrolmap").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&["frobnicate"]).0, 1);
        assert_eq!(run(&["solve-a", "--bogus"]).0, 1);
        assert_eq!(run(&["solve-a"]).0, 1);
        assert_eq!(run(&["solve-a", "--scenario", "nowhere"]).0, 1);
        assert_eq!(run(&["trace", "--scenario", "example1"]).0, 1);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn missing_input_exits_two() {
        let (code, _, err) = run(&["stats", "--profit", "/nonexistent/p.txt", "--benefit", "/nonexistent/b.txt"]);
        assert_eq!(code, 2);
        assert!(err.contains("/nonexistent/p.txt"));
    }
}
