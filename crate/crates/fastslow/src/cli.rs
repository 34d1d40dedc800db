//! Command-line front end: run a model, sweep eps, audit hypotheses, fit
//! dichotomy constants. Emits CSV for plotting and JSON for regression
//! gates.
//!
//! Exit codes: 0 ok, 2 integration failure, 3 hypothesis failure,
//! 64 usage error. `TIKHONOV_SEED` fixes the Monte-Carlo seed of the tube
//! sampler.
//!
//! CSV output: one `#`-prefixed parameter-echo line (ignored by gnuplot
//! and spreadsheet importers), one RFC-4180 header row, then data rows
//! with 17 significant digits and `.` as the decimal separator. Output is
//! byte-identical across repeated runs with the same flags; the echo line
//! carries an FNV-1a hash of the configuration.

use crate::dichotomy::{fit_dichotomy, DichotomyFit};
use crate::error::Error;
use crate::hypotheses::{full_report, AuditConfig};
use crate::integrate::IntegratorConfig;
use crate::layer::{integrate_layer, LayerSolution};
use crate::linalg::{spectral_bound, Matrix};
use crate::models::{
    allee_system, predprey_system, predprey_system_literal, AlleeParams, PredPreyParams,
};
use crate::reduction::{
    error_curves, integrate_full, integrate_reduced, ReducedConfig, SlowSolution,
};
use crate::system::{jacobian, FastSlowSystem, JacobianOf, State};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTEGRATION: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "fastslow",
    version,
    about = "Quasi-steady-state reduction of fast-slow ODE systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the full and reduced systems and emit comparison curves.
    Run(RunArgs),
    /// Sweep eps and report supremum errors and the fitted convergence order.
    Sweep(SweepArgs),
    /// Audit the reduction hypotheses and emit a JSON report.
    Check(CheckArgs),
    /// Fit propagator-norm dichotomy constants for a matrix function.
    Dichotomy(DichotomyArgs),
    /// Print gnuplot-style column hints for the run CSV.
    Columns(ColumnsArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Built-in model: predprey, allee, or user-json (model read from --config).
    #[arg(long, default_value = "predprey")]
    model: String,
    /// JSON config: {"model": ..., "params": {...}, "init": [...], "eps": ...}.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial state as comma-separated slow-then-fast components.
    #[arg(long)]
    init: Option<String>,
    /// Use the literal published form of the aggregated predator-prey
    /// reduced system instead of the derived one.
    #[arg(long = "literal-paper-eq7", default_value_t = false)]
    literal_paper_eq7: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    eps: f64,
    #[arg(long = "t-end", default_value_t = 100.0)]
    t_end: f64,
    #[arg(long = "dt-out", default_value_t = 0.1)]
    dt_out: f64,
    /// Refuse to run when the hypothesis audit fails.
    #[arg(long = "require-hypotheses", default_value_t = false)]
    require_hypotheses: bool,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Decreasing comma-separated eps values.
    #[arg(long = "eps-list")]
    eps_list: String,
    #[arg(long = "t-end", default_value_t = 100.0)]
    t_end: f64,
    #[arg(long = "dt-out", default_value_t = 0.1)]
    dt_out: f64,
    /// Output stem: writes <out>.json and <out>.csv (stdout JSON when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Upper end of the eps interval sampled in the tube audit.
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Tube radius.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long = "t-end", default_value_t = 40.0)]
    t_end: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DichotomyArgs {
    /// JSON matrix-function spec (see README for the term grammar).
    #[arg(long = "spec")]
    spec: PathBuf,
    /// Comma-separated eps values.
    #[arg(long = "eps-list")]
    eps_list: String,
    #[arg(long, default_value_t = 4.0)]
    horizon: f64,
    /// Decay exponent of the fitted bound; defaults to half the worst
    /// sampled spectral margin.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ColumnsArgs {
    #[command(flatten)]
    model: ModelArgs,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

fn usage(msg: impl Into<String>) -> CliFailure {
    CliFailure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

impl From<Error> for CliFailure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::Json(_) | Error::Io(_) => EXIT_USAGE,
            Error::HypothesisViolated { .. } => EXIT_HYPOTHESIS,
            _ => EXIT_INTEGRATION,
        };
        CliFailure {
            code,
            message: e.to_string(),
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_OK
                }
                _ => {
                    eprint!("{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.cmd {
        Command::Run(a) => cmd_run(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Dichotomy(a) => cmd_dichotomy(&a),
        Command::Columns(a) => cmd_columns(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("fastslow: {}", f.message);
            f.code
        }
    }
}

// ---------------------------------------------------------------------------
// model construction

#[derive(Debug, Deserialize, Default)]
struct ConfigFile {
    model: Option<String>,
    params: Option<serde_json::Value>,
    init: Option<Vec<f64>>,
    eps: Option<f64>,
}

struct BuiltModel {
    sys: FastSlowSystem,
    init: State,
    /// Echo string for the CSV header.
    echo: String,
    config_eps: Option<f64>,
}

fn parse_init(text: &str) -> Result<Vec<f64>, CliFailure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("bad --init: {e}")))
        })
        .collect()
}

fn build_model(margs: &ModelArgs) -> Result<BuiltModel, CliFailure> {
    let config: ConfigFile = match &margs.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("bad config JSON: {e}")))?
        }
        None => ConfigFile::default(),
    };
    let name = if margs.model == "user-json" {
        config
            .model
            .clone()
            .ok_or_else(|| usage("--model user-json needs a \"model\" key in --config"))?
    } else {
        margs.model.clone()
    };
    let (sys, default_init, echo) = match name.as_str() {
        "predprey" => {
            let params: PredPreyParams = match &config.params {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| usage(format!("bad predprey params: {e}")))?,
                None => PredPreyParams::default(),
            };
            params.validate().map_err(CliFailure::from)?;
            let sys = if margs.literal_paper_eq7 {
                predprey_system_literal(params)
            } else {
                predprey_system(params)
            };
            let echo = format!(
                "model=predprey m1={} m2={} r1={} r2={} a={} b={} d={} literal={}",
                params.m1,
                params.m2,
                params.r1,
                params.r2,
                params.a,
                params.b,
                params.d,
                margs.literal_paper_eq7
            );
            // Slow block (n, p), fast block (n2).
            (sys, vec![3.0, 1.0, 2.0], echo)
        }
        "allee" => {
            let params: AlleeParams = match &config.params {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| usage(format!("bad allee params: {e}")))?,
                None => AlleeParams::default(),
            };
            params.validate().map_err(CliFailure::from)?;
            if margs.literal_paper_eq7 {
                return Err(usage(
                    "--literal-paper-eq7 applies to the predprey model only",
                ));
            }
            let echo = format!(
                "model=allee beta={} mu={} lambda={} xiK={}",
                params.beta, params.mu, params.lambda, params.xi_k
            );
            (allee_system(params), vec![0.2, 0.0], echo)
        }
        other => return Err(usage(format!("unknown model '{other}'"))),
    };
    let init_vec = match (&margs.init, &config.init) {
        (Some(text), _) => parse_init(text)?,
        (None, Some(v)) => v.clone(),
        (None, None) => default_init,
    };
    if init_vec.len() != sys.n + sys.m {
        return Err(usage(format!(
            "--init needs {} components (slow then fast), got {}",
            sys.n + sys.m,
            init_vec.len()
        )));
    }
    let init = State::new(0.0, init_vec[..sys.n].to_vec(), init_vec[sys.n..].to_vec());
    let echo = format!(
        "{echo} init={}",
        init_vec
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(BuiltModel {
        sys,
        init,
        echo,
        config_eps: config.eps,
    })
}

fn seed_from_env() -> Result<u64, CliFailure> {
    match std::env::var("TIKHONOV_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map_err(|e| usage(format!("bad TIKHONOV_SEED: {e}"))),
        Err(_) => Ok(0),
    }
}

// ---------------------------------------------------------------------------
// formatting

/// 17 significant digits; round-trips every f64.
fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// FNV-1a 64-bit over the canonical configuration echo.
fn config_hash(echo: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in echo.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliFailure> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)
                .map_err(|e| usage(format!("cannot create {}: {e}", p.display())))?;
            f.write_all(content.as_bytes()).map_err(|e| CliFailure {
                code: EXIT_INTEGRATION,
                message: e.to_string(),
            })?;
        }
        None => {
            print!("{content}");
        }
    }
    Ok(())
}

fn column_names(sys: &FastSlowSystem) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for i in 1..=sys.n {
        cols.push(format!("u_full_{i}"));
    }
    for i in 1..=sys.m {
        cols.push(format!("v_full_{i}"));
    }
    for i in 1..=sys.n {
        cols.push(format!("u_red_{i}"));
    }
    for i in 1..=sys.m {
        cols.push(format!("v_qss_{i}"));
    }
    for i in 1..=sys.m {
        cols.push(format!("v_comp_{i}"));
    }
    cols.push("err_u".into());
    cols.push("err_v".into());
    cols.push("err_comp".into());
    cols
}

fn output_grid(t_end: f64, dt_out: f64) -> Result<Vec<f64>, CliFailure> {
    if !(dt_out > 0.0 && t_end > 0.0) {
        return Err(usage("t-end and dt-out must be positive"));
    }
    let steps = (t_end / dt_out).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|i| i as f64 * dt_out).collect();
    if let Some(&last) = grid.last() {
        if last < t_end - 1e-12 * t_end.max(1.0) {
            grid.push(t_end);
        }
    }
    Ok(grid)
}

// ---------------------------------------------------------------------------
// shared pipeline

struct Comparison {
    slow: SlowSolution,
    layer: LayerSolution,
}

fn prepare_comparison(
    sys: &FastSlowSystem,
    init: &State,
    t_end: f64,
    grid: &[f64],
) -> Result<Comparison, Error> {
    let reduced_cfg = ReducedConfig {
        integrator: IntegratorConfig::default().with_tols(1e-10, 1e-12),
        ..ReducedConfig::default()
    };
    let slow = integrate_reduced(sys, &init.u, (0.0, t_end), &reduced_cfg, Some(grid))?;
    // Layer budget: reach the floor of the fit window with margin.
    let root = crate::reduction::solve_qss_seeded(sys, &init.u, 0.0)?.v_root;
    let s0 = State::new(0.0, init.u.clone(), root);
    let kappa = (-spectral_bound(&jacobian(sys, JacobianOf::Gv, &s0, 0.0)?)?).max(0.1);
    let layer_cfg = IntegratorConfig::default().with_tols(1e-10, 1e-12);
    let layer = integrate_layer(sys, &init.u, &init.v, 45.0 / kappa, &layer_cfg, Some(8000))?;
    Ok(Comparison { slow, layer })
}

fn run_csv(
    sys: &FastSlowSystem,
    init: &State,
    eps: f64,
    t_end: f64,
    grid: &[f64],
    echo: &str,
) -> Result<String, Error> {
    let cmp = prepare_comparison(sys, init, t_end, grid)?;
    let full = integrate_full(
        sys,
        init,
        eps,
        t_end,
        &IntegratorConfig::default(),
        Some(grid),
    )?;
    let curves = error_curves(sys, &full, &cmp.slow, &cmp.layer, eps, grid)?;

    let mut out = String::new();
    let echo_line = format!(
        "{echo} eps={eps} t_end={t_end} version={}",
        env!("CARGO_PKG_VERSION")
    );
    out.push_str(&format!(
        "# {echo_line} config_hash={:016x}\n",
        config_hash(&echo_line)
    ));
    out.push_str(
        &column_names(sys)
            .iter()
            .map(|c| csv_field(c))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for (i, &t) in grid.iter().enumerate() {
        let yf = full.interpolate(t)?;
        let ur = cmp.slow.traj.interpolate(t)?;
        let point = crate::reduction::manifold_at(sys, &cmp.slow, t)?;
        let corr = cmp.layer.correction_at(t / eps);
        let mut fields: Vec<String> = Vec::with_capacity(1 + 2 * sys.n + 3 * sys.m + 3);
        fields.push(fmt_g17(t));
        for x in &yf {
            fields.push(fmt_g17(*x));
        }
        for x in &ur {
            fields.push(fmt_g17(*x));
        }
        for x in &point.vbar {
            fields.push(fmt_g17(*x));
        }
        for (p, c) in point.vbar.iter().zip(&corr) {
            fields.push(fmt_g17(p + c));
        }
        fields.push(fmt_g17(curves.err_u[i]));
        fields.push(fmt_g17(curves.err_v[i]));
        fields.push(fmt_g17(curves.err_composite[i]));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn cmd_run(args: &RunArgs) -> Result<(), CliFailure> {
    let built = build_model(&args.model)?;
    let eps = built.config_eps.unwrap_or(args.eps);
    if !(eps > 0.0 && eps <= built.sys.eps_max) {
        return Err(usage(format!(
            "eps = {eps} outside (0, {}] for model {}",
            built.sys.eps_max, built.sys.name
        )));
    }
    if args.require_hypotheses {
        let seed = seed_from_env()?;
        let audit_cfg = AuditConfig {
            seed,
            eps0: eps,
            ..AuditConfig::default()
        };
        let report = full_report(
            &built.sys,
            &built.init.u,
            &built.init.v,
            (0.0, args.t_end),
            &audit_cfg,
        )
        .map_err(CliFailure::from)?;
        if !report.pass {
            return Err(CliFailure {
                code: EXIT_HYPOTHESIS,
                message: format!(
                    "hypothesis audit failed on {}",
                    report.failing_assumption().unwrap_or("unknown")
                ),
            });
        }
    }
    let grid = output_grid(args.t_end, args.dt_out)?;
    let csv = run_csv(&built.sys, &built.init, eps, args.t_end, &grid, &built.echo)
        .map_err(CliFailure::from)?;
    write_output(args.out.as_deref(), &csv)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Serialize)]
struct SweepEntry {
    eps: f64,
    sup_u_after_layer: f64,
    sup_u_all: f64,
    sup_v_after_layer: f64,
    sup_composite_all: f64,
    t_rho: f64,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    model: String,
    echo: String,
    t_end: f64,
    entries: Vec<SweepEntry>,
    /// Log-log slope of sup error against eps; `null` for degenerate sweeps.
    fitted_order_u: Option<f64>,
    fitted_order_composite: Option<f64>,
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

fn parse_eps_list(text: &str) -> Result<Vec<f64>, CliFailure> {
    let eps: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("bad --eps-list: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if eps.is_empty() {
        return Err(usage("--eps-list is empty"));
    }
    for w in eps.windows(2) {
        if !(w[1] < w[0]) {
            return Err(usage("--eps-list must be strictly decreasing"));
        }
    }
    Ok(eps)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliFailure> {
    let built = build_model(&args.model)?;
    let eps_list = parse_eps_list(&args.eps_list)?;
    for &eps in &eps_list {
        if !(eps > 0.0 && eps <= built.sys.eps_max) {
            return Err(usage(format!(
                "eps = {eps} outside (0, {}]",
                built.sys.eps_max
            )));
        }
    }
    let grid = output_grid(args.t_end, args.dt_out)?;
    let cmp =
        prepare_comparison(&built.sys, &built.init, args.t_end, &grid).map_err(CliFailure::from)?;

    // Independent per-eps jobs; results collected in list order.
    let sys = &built.sys;
    let init = &built.init;
    let (slow, layer) = (&cmp.slow, &cmp.layer);
    let grid_ref = &grid;
    let results: Vec<Result<SweepEntry, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = eps_list
            .iter()
            .map(|&eps| {
                scope.spawn(move || -> Result<SweepEntry, Error> {
                    let full = integrate_full(
                        sys,
                        init,
                        eps,
                        args.t_end,
                        &IntegratorConfig::default(),
                        Some(grid_ref),
                    )?;
                    let curves = error_curves(sys, &full, slow, layer, eps, grid_ref)?;
                    Ok(SweepEntry {
                        eps,
                        sup_u_after_layer: curves.sup_u_after_layer,
                        sup_u_all: curves.sup_u_all,
                        sup_v_after_layer: curves.sup_v_after_layer,
                        sup_composite_all: curves.sup_composite_all,
                        t_rho: curves.t_rho,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut entries = Vec::with_capacity(results.len());
    for r in results {
        entries.push(r.map_err(CliFailure::from)?);
    }
    let sup_u: Vec<f64> = entries.iter().map(|e| e.sup_u_after_layer).collect();
    let sup_c: Vec<f64> = entries.iter().map(|e| e.sup_composite_all).collect();
    let report = SweepReport {
        model: built.sys.name.clone(),
        echo: built.echo.clone(),
        t_end: args.t_end,
        fitted_order_u: loglog_slope(&eps_list, &sup_u),
        fitted_order_composite: loglog_slope(&eps_list, &sup_c),
        entries,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliFailure {
        code: EXIT_INTEGRATION,
        message: e.to_string(),
    })?;

    let mut csv = String::new();
    let echo_line = format!("{} t_end={} sweep", built.echo, args.t_end);
    csv.push_str(&format!(
        "# {echo_line} config_hash={:016x}\n",
        config_hash(&echo_line)
    ));
    csv.push_str("eps,sup_u_after_layer,sup_u_all,sup_v_after_layer,sup_composite_all,t_rho\n");
    for e in &report.entries {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_g17(e.eps),
            fmt_g17(e.sup_u_after_layer),
            fmt_g17(e.sup_u_all),
            fmt_g17(e.sup_v_after_layer),
            fmt_g17(e.sup_composite_all),
            fmt_g17(e.t_rho)
        ));
    }
    match &args.out {
        Some(stem) => {
            write_output(Some(&stem.with_extension("json")), &(json + "\n"))?;
            write_output(Some(&stem.with_extension("csv")), &csv)?;
            Ok(())
        }
        None => write_output(None, &(json + "\n")),
    }
}

// ---------------------------------------------------------------------------
// check

fn cmd_check(args: &CheckArgs) -> Result<(), CliFailure> {
    let built = build_model(&args.model)?;
    let seed = seed_from_env()?;
    let cfg = AuditConfig {
        seed,
        delta: args.delta,
        eps0: args.eps,
        ..AuditConfig::default()
    };
    let report = full_report(
        &built.sys,
        &built.init.u,
        &built.init.v,
        (0.0, args.t_end),
        &cfg,
    )
    .map_err(CliFailure::from)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliFailure {
        code: EXIT_INTEGRATION,
        message: e.to_string(),
    })?;
    write_output(args.out.as_deref(), &(json + "\n"))?;
    if !report.pass {
        return Err(CliFailure {
            code: EXIT_HYPOTHESIS,
            message: format!(
                "hypothesis audit FAILED on {}",
                report.failing_assumption().unwrap_or("unknown")
            ),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dichotomy

#[derive(Debug, Deserialize)]
struct MatrixSpec {
    size: usize,
    /// entries[i][j] is a list of terms summed to give D_ij(t).
    entries: Vec<Vec<Vec<TermSpec>>>,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(untagged)]
enum TermSpec {
    Const {
        #[serde(rename = "const")]
        value: f64,
    },
    Poly {
        poly: Vec<f64>,
    },
    Sin {
        sin: SinSpec,
    },
}

#[derive(Debug, Deserialize, Clone)]
struct SinSpec {
    amp: f64,
    omega: f64,
    #[serde(default)]
    phase: f64,
}

impl TermSpec {
    fn eval(&self, t: f64) -> f64 {
        match self {
            TermSpec::Const { value } => *value,
            TermSpec::Poly { poly } => poly.iter().rev().fold(0.0, |acc, c| acc * t + c),
            TermSpec::Sin { sin } => sin.amp * (sin.omega * t + sin.phase).sin(),
        }
    }
}

fn load_matrix_spec(path: &Path) -> Result<(usize, Vec<Vec<Vec<TermSpec>>>), CliFailure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let spec: MatrixSpec =
        serde_json::from_str(&text).map_err(|e| usage(format!("bad matrix spec: {e}")))?;
    if spec.entries.len() != spec.size || spec.entries.iter().any(|r| r.len() != spec.size) {
        return Err(usage("matrix spec entries must be size x size"));
    }
    Ok((spec.size, spec.entries))
}

#[derive(Debug, Serialize)]
struct DichotomyReport {
    spec: String,
    horizon: f64,
    fits: Vec<DichotomyFit>,
    /// Relative spread of c across the eps list.
    c_spread_rel: f64,
}

fn cmd_dichotomy(args: &DichotomyArgs) -> Result<(), CliFailure> {
    let (size, entries) = load_matrix_spec(&args.spec)?;
    let eps_list = parse_eps_list(&args.eps_list)?;
    let d = move |t: f64| -> Matrix {
        let mut m = Matrix::zeros(size, size);
        for i in 0..size {
            for j in 0..size {
                m[(i, j)] = entries[i][j].iter().map(|term| term.eval(t)).sum();
            }
        }
        m
    };
    let mut fits = Vec::with_capacity(eps_list.len());
    for &eps in &eps_list {
        let fit =
            fit_dichotomy(&d, eps, args.horizon, None, args.sigma).map_err(CliFailure::from)?;
        fits.push(fit);
    }
    let cmax = fits.iter().map(|f| f.c).fold(0.0f64, f64::max);
    let cmin = fits.iter().map(|f| f.c).fold(f64::INFINITY, f64::min);
    let report = DichotomyReport {
        spec: args.spec.display().to_string(),
        horizon: args.horizon,
        c_spread_rel: if cmax > 0.0 {
            (cmax - cmin) / cmax
        } else {
            0.0
        },
        fits,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliFailure {
        code: EXIT_INTEGRATION,
        message: e.to_string(),
    })?;
    write_output(args.out.as_deref(), &(json + "\n"))
}

fn cmd_columns(args: &ColumnsArgs) -> Result<(), CliFailure> {
    let built = build_model(&args.model)?;
    let cols = column_names(&built.sys);
    let mut out = String::new();
    out.push_str(&format!(
        "# gnuplot column hints for model {}\n",
        built.sys.name
    ));
    for (i, c) in cols.iter().enumerate() {
        out.push_str(&format!("{}:{c}\n", i + 1));
    }
    out.push_str(&format!(
        "# example: plot 'run.csv' using 1:2 with lines  # t vs {}\n",
        cols[1]
    ));
    write_output(None, &out)
}
