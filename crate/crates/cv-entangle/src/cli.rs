//! Command-line front end: parameter parsing, sweeps, figure-data
//! reproduction and machine-readable outputs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 convergence error,
//! 4 validation failure.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::decoherence::{
    survival_time, survival_time_closed_form, survival_time_transcendental,
};
use crate::error::Error;
use crate::grid::{entanglement_grid, RefinePolicy};
use crate::modefilter::{lo_waveform, mode_scan, optimize_mode};
use crate::montecarlo::{validate, SimConfig};
use crate::params::{build_params_checked, SystemParams};
use crate::wiener_hopf::solve_lambda;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Default Omega_F (in units of omega_m) used by the --ratio shorthand.
pub const RATIO_DEFAULT_OMEGA_F: f64 = 0.1;

#[derive(Parser, Debug)]
#[command(
    name = "cv-entangle",
    version,
    about = "Oscillator / outgoing-field Gaussian entanglement toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for sweeps and trajectory ensembles (1 = bit-exact
    /// serial output).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Mechanical quality factor omega_m / (2 gamma_m).
    #[arg(long)]
    pub qm: Option<f64>,

    /// Interaction frequency Omega_q in units of omega_m.
    #[arg(long = "omega-q")]
    pub omega_q: Option<f64>,

    /// Thermal frequency Omega_F in units of omega_m.
    #[arg(long = "omega-f")]
    pub omega_f: Option<f64>,

    /// Thermal occupation number (alternative to --omega-f).
    #[arg(long)]
    pub nth: Option<f64>,

    /// Shorthand: set Omega_q = ratio * Omega_F with Omega_F = 0.1.
    #[arg(long)]
    pub ratio: Option<f64>,

    /// key = value configuration file; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Full oscillator-field logarithmic negativity.
    Negativity {
        #[command(flatten)]
        params: ParamArgs,
        /// grid | wiener-hopf | both
        #[arg(long, default_value = "both")]
        method: String,
        /// Cross-check / refinement tolerance on E_N.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Sweep E_N over the interaction-to-thermal ratio; CSV output.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "both")]
        method: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 0.1)]
        start: f64,
        #[arg(long, default_value_t = 100.0)]
        stop: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// log | linear
        #[arg(long, default_value = "log")]
        spacing: String,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Entanglement survival time under free thermal evolution.
    Survival {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Maximally entangled output mode; optional scan and LO waveform CSV.
    Mode {
        #[command(flatten)]
        params: ParamArgs,
        /// Also emit a scan of E_N^sub over (omega_g - omega_m)/omega_m.
        #[arg(long)]
        scan: bool,
        /// Scan range start, relative detuning.
        #[arg(long, default_value_t = 1e-7, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        /// Mixing angle used for the scan (the optimum's zeta when omitted).
        #[arg(long)]
        zeta: Option<f64>,
        /// Emit the local-oscillator envelope for this quadrature angle.
        #[arg(long)]
        lo: bool,
        #[arg(long = "zeta-q", default_value_t = std::f64::consts::FRAC_PI_2)]
        zeta_q: f64,
        /// LO sample count over [-span, 0].
        #[arg(long = "lo-points", default_value_t = 200)]
        lo_points: usize,
        /// LO time span in units of 1/gamma_g (waveform decay times).
        #[arg(long = "lo-span", default_value_t = 5.0)]
        lo_span: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo validation of the analytic covariance.
    Validate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "n-traj", default_value_t = 10_000)]
        n_traj: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Integrator step (defaults to the stability bound).
        #[arg(long)]
        dt: Option<f64>,
        /// Field bin width (defaults to the grid resolution).
        #[arg(long = "bin-width")]
        bin_width: Option<f64>,
        /// Retained past-field duration.
        #[arg(long)]
        horizon: Option<f64>,
    },
}

/// Parse a `key = value` configuration file.
fn parse_config(path: &PathBuf) -> Result<HashMap<String, f64>, Error> {
    let text = fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected key = value", path.display(), lineno + 1))
        })?;
        let v: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!(
                "{}:{}: bad number {:?}",
                path.display(),
                lineno + 1,
                value.trim()
            ))
        })?;
        map.insert(key.trim().to_string(), v);
    }
    Ok(map)
}

/// Resolve system parameters from flags plus optional config file.
pub fn resolve_params(args: &ParamArgs) -> Result<SystemParams, Error> {
    let mut qm = args.qm;
    let mut omega_q = args.omega_q;
    let mut omega_f = args.omega_f;
    let mut nth = args.nth;
    let mut ratio = args.ratio;
    if let Some(path) = &args.config {
        let file = parse_config(path)?;
        for (key, value) in &file {
            match key.as_str() {
                "qm" => qm = qm.or(Some(*value)),
                "omega-q" | "omega_q" => omega_q = omega_q.or(Some(*value)),
                "omega-f" | "omega_f" => omega_f = omega_f.or(Some(*value)),
                "nth" | "n-th" | "n_th" => nth = nth.or(Some(*value)),
                "ratio" => ratio = ratio.or(Some(*value)),
                other => {
                    return Err(Error::Config(format!("unknown config key {other:?}")));
                }
            }
        }
    }
    let qm = qm.unwrap_or(1e3);
    if let Some(r) = ratio {
        if omega_q.is_some() {
            return Err(Error::Conflict("--ratio conflicts with --omega-q".into()));
        }
        if nth.is_some() {
            return Err(Error::Conflict("--ratio conflicts with --nth".into()));
        }
        let of = omega_f.unwrap_or(RATIO_DEFAULT_OMEGA_F);
        return build_params_checked(1.0, qm, r * of, Some(of), None);
    }
    build_params_checked(1.0, qm, omega_q.unwrap_or(0.0), omega_f, nth)
}

fn classify(err: &Error) -> i32 {
    match err {
        Error::Convergence { .. } | Error::NoEntanglement(_) => EXIT_CONVERGENCE,
        Error::Config(_) | Error::InvalidParameter(_) | Error::Conflict(_) | Error::Domain(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_CONVERGENCE,
    }
}

struct Output {
    sink: Box<dyn Write>,
}

impl Output {
    fn open(path: &Option<PathBuf>) -> Result<Self, Error> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(fs::File::create(p)?),
            None => Box::new(std::io::stdout()),
        };
        Ok(Output { sink })
    }

    fn header(&mut self, subcommand: &str) -> Result<(), Error> {
        writeln!(self.sink, "# cv-entangle v{} {subcommand}", env!("CARGO_PKG_VERSION"))?;
        Ok(())
    }

    fn line(&mut self, s: &str) -> Result<(), Error> {
        writeln!(self.sink, "{s}")?;
        Ok(())
    }
}

pub fn run(cli: Cli) -> i32 {
    if cli.threads > 1 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    } else {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Negativity { params, method, tol } => cmd_negativity(&params, &method, tol),
        Command::Sweep { params, method, tol, start, stop, points, spacing, output } => {
            cmd_sweep(&params, &method, tol, start, stop, points, &spacing, &output)
        }
        Command::Survival { params, tol } => cmd_survival(&params, tol),
        Command::Mode {
            params,
            scan,
            start,
            stop,
            points,
            zeta,
            lo,
            zeta_q,
            lo_points,
            lo_span,
            output,
        } => cmd_mode(
            &params, scan, start, stop, points, zeta, lo, zeta_q, lo_points, lo_span, &output,
        ),
        Command::Validate { params, n_traj, seed, dt, bin_width, horizon } => {
            cmd_validate(&params, n_traj, seed, dt, bin_width, horizon)
        }
    }
}

fn check_method(method: &str) -> Result<(), Error> {
    match method {
        "grid" | "wiener-hopf" | "both" => Ok(()),
        other => Err(Error::Config(format!(
            "unknown method {other:?} (expected grid | wiener-hopf | both)"
        ))),
    }
}

fn cmd_negativity(args: &ParamArgs, method: &str, tol: f64) -> Result<i32, Error> {
    check_method(method)?;
    let p = resolve_params(args)?;
    let policy = RefinePolicy { tol, ..RefinePolicy::default() };
    println!(
        "params: qm={} omega_q={} omega_f={} nth={}",
        p.q_m(),
        p.omega_q,
        p.omega_f,
        p.n_th
    );
    let mut grid_en = None;
    let mut wh_en = None;
    if method != "wiener-hopf" {
        if p.omega_q == 0.0 {
            println!("method=grid e_n=0 lambda_min=1 below_unity=0 converged=true");
            grid_en = Some(0.0);
        } else {
            let res = entanglement_grid(&p, &policy)?;
            println!(
                "method=grid e_n={} lambda_min={} below_unity={} converged={}",
                res.e_n,
                res.min_symplectic(),
                res.below_unity_count,
                res.converged
            );
            println!("trace (bins, horizon, e_n): {:?}", res.convergence_trace);
            grid_en = Some(res.e_n);
        }
    }
    if method != "grid" {
        if p.omega_q == 0.0 {
            println!("method=wiener-hopf e_n=0 lambda_min=1 below_unity=0");
            wh_en = Some(0.0);
        } else {
            let res = solve_lambda(&p)?;
            println!(
                "method=wiener-hopf e_n={} lambda_min={} below_unity={}",
                res.e_n,
                res.min_symplectic(),
                res.below_unity_count
            );
            wh_en = Some(res.e_n);
        }
    }
    println!("e_n_closed_form={}", p.e_n_closed_form());
    if let (Some(g), Some(w)) = (grid_en, wh_en) {
        let diff = (g - w).abs();
        println!("cross_check_diff={diff}");
        if diff > tol {
            eprintln!("error: grid and wiener-hopf disagree beyond tol={tol}: |{g} - {w}| = {diff}");
            return Ok(EXIT_VALIDATION);
        }
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    args: &ParamArgs,
    method: &str,
    tol: f64,
    start: f64,
    stop: f64,
    points: usize,
    spacing: &str,
    output: &Option<PathBuf>,
) -> Result<i32, Error> {
    check_method(method)?;
    if points < 1 || !(start > 0.0) || !(stop > start) && points > 1 {
        return Err(Error::Config("sweep range is degenerate".into()));
    }
    let base = resolve_params(args)?;
    let omega_f = if base.omega_f > 0.0 { base.omega_f } else { RATIO_DEFAULT_OMEGA_F };
    let ratios: Vec<f64> = (0..points)
        .map(|k| {
            let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
            match spacing {
                "linear" => start + (stop - start) * t,
                _ => start * (stop / start).powf(t),
            }
        })
        .collect();
    if spacing != "log" && spacing != "linear" {
        return Err(Error::Config(format!("unknown spacing {spacing:?}")));
    }

    let mut out = Output::open(output)?;
    out.header("sweep")?;
    out.line("ratio,e_n,e_n_closed_form,method,lambda_min,converged")?;
    let policy = RefinePolicy { tol, ..RefinePolicy::default() };
    let mut warnings = 0usize;
    for &r in &ratios {
        let p = build_params_checked(1.0, base.q_m(), r * omega_f, Some(omega_f), None)?;
        let closed = p.e_n_closed_form();
        let (e_n, lam, converged) = match method {
            "grid" => match entanglement_grid(&p, &policy) {
                Ok(res) => (res.e_n, res.min_symplectic(), true),
                Err(Error::Convergence { trace, .. }) => {
                    warnings += 1;
                    let best = trace.last().map(|t| t.2).unwrap_or(f64::NAN);
                    (best, f64::NAN, false)
                }
                Err(e) => return Err(e),
            },
            "wiener-hopf" => {
                let res = solve_lambda(&p)?;
                (res.e_n, res.min_symplectic(), true)
            }
            _ => {
                let wh = solve_lambda(&p)?;
                match entanglement_grid(&p, &policy) {
                    Ok(g) => {
                        let agree = (g.e_n - wh.e_n).abs() <= tol;
                        if !agree {
                            warnings += 1;
                        }
                        (wh.e_n, wh.min_symplectic(), agree)
                    }
                    Err(Error::Convergence { .. }) => {
                        warnings += 1;
                        (wh.e_n, wh.min_symplectic(), false)
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        out.line(&format!("{r},{e_n},{closed},{method},{lam},{converged}"))?;
    }
    if warnings > 0 {
        eprintln!("warning: {warnings} of {points} sweep points not converged/cross-checked");
    }
    Ok(EXIT_OK)
}

fn cmd_survival(args: &ParamArgs, tol: f64) -> Result<i32, Error> {
    let p = resolve_params(args)?;
    let policy = RefinePolicy { tol, ..RefinePolicy::default() };
    let grid = survival_time(&p, &policy)?;
    let trans = survival_time_transcendental(&p)?;
    let closed = survival_time_closed_form(&p);
    println!("theta_s_grid={}", grid.theta_s);
    println!("theta_s_transcendental={}", trans.theta_s);
    println!("theta_s_closed_form={}", closed.theta_s);
    println!("transcendental_residual={}", trans.diagnostic);
    println!("grid_bracket_width_omega={}", grid.diagnostic * p.omega_m);
    println!(
        "cross_diff_grid_transcendental={}",
        (grid.theta_s - trans.theta_s).abs()
    );
    println!(
        "cross_diff_transcendental_closed={}",
        (trans.theta_s - closed.theta_s).abs()
    );
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mode(
    args: &ParamArgs,
    scan: bool,
    start: f64,
    stop: f64,
    points: usize,
    zeta: Option<f64>,
    lo: bool,
    zeta_q: f64,
    lo_points: usize,
    lo_span: f64,
    output: &Option<PathBuf>,
) -> Result<i32, Error> {
    let p = resolve_params(args)?;
    let opt = optimize_mode(&p)?;
    println!("omega_g={}", opt.mode.omega_g);
    println!("gamma_g={}", opt.mode.gamma_g);
    println!("zeta={}", opt.mode.zeta);
    println!("e_n_sub={}", opt.e_n_sub);
    println!("omega_g_fit={}", crate::modefilter::omega_g_seed(&p));
    for (k, s) in opt.starts.iter().enumerate() {
        println!(
            "start[{k}]: from=({}, {}) best=({}, {}) e_n_sub={} evals={} converged={}",
            s.start.0, s.start.1, s.best.0, s.best.1, s.e_n_sub, s.evals, s.converged
        );
    }
    if scan {
        let zeta = zeta.unwrap_or(opt.mode.zeta);
        let floor = crate::modefilter::omega_g_floor(&p);
        let wgs: Vec<f64> = (0..points)
            .map(|k| {
                let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
                let rel = start + (stop - start) * t;
                (p.omega_m * (1.0 + rel)).max(floor * (1.0 + 1e-12) + 1e-12)
            })
            .collect();
        let curve = mode_scan(&p, &wgs, zeta)?;
        let mut out = Output::open(output)?;
        out.header("mode scan")?;
        out.line("omega_g_rel,e_n_sub")?;
        for (wg, e) in curve {
            out.line(&format!("{},{e}", (wg - p.omega_m) / p.omega_m))?;
        }
    }
    if lo {
        let span = lo_span / opt.mode.gamma_g;
        let times: Vec<f64> = (0..lo_points)
            .map(|k| -span * (lo_points - 1 - k) as f64 / (lo_points - 1).max(1) as f64)
            .collect();
        let wave = lo_waveform(&opt.mode, zeta_q, &times);
        let mut out = Output::open(output)?;
        out.header("mode lo")?;
        out.line("t,l1,l2")?;
        for (t, l1, l2) in wave {
            out.line(&format!("{t},{l1},{l2}"))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_validate(
    args: &ParamArgs,
    n_traj: usize,
    seed: u64,
    dt: Option<f64>,
    bin_width: Option<f64>,
    horizon: Option<f64>,
) -> Result<i32, Error> {
    let p = resolve_params(args)?;
    let dt = dt.unwrap_or(0.01 / p.omega_m.max(p.gamma_m));
    let bin_width = bin_width.unwrap_or_else(|| {
        // integer number of steps per bin near the grid resolution limit
        let target = 0.1 / p.omega_m;
        (target / dt).floor().max(1.0) * dt
    });
    let horizon = horizon.unwrap_or(40.0 * bin_width);
    let cfg = SimConfig {
        dt,
        t_relax: 10.0 / p.gamma_m,
        n_traj,
        seed,
        bin_width,
        horizon,
    };
    let report = validate(&p, &cfg)?;
    println!("n_traj={n_traj}");
    println!("seed={seed}");
    println!("entries={}", report.n_entries);
    println!("within_5se={}", report.within_5se);
    println!("fraction_within={}", report.fraction_within);
    println!("max_z={}", report.max_z);
    println!("verdict={}", if report.pass { "pass" } else { "fail" });
    Ok(if report.pass { EXIT_OK } else { EXIT_VALIDATION })
}
