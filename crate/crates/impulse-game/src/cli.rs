//! Command-line front end: `solve`, `verify`, `simulate`, `sweep`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::model::GameParams;
use crate::montecarlo::{simulate, SimConfig, ThresholdStrategy};
use crate::payoffs::PiecewisePayoff;
use crate::qvi::{self, GridSpec};
use crate::scenario::{self, ConfigExtras};
use crate::type1::{solve_type1, Type1Equilibrium};
use crate::type2::{solve_type2, Type2Equilibrium};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_EQUILIBRIUM: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "impulse-game", version, about = "Solve, certify and simulate threshold equilibria of the impulse-controller-vs-stopper game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Source {
    /// Built-in scenario name: type1-A, type1-B, type2-A, type2-B
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Config file in flat key=value format
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write machine-readable output (CSV) here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for Type I and Type II threshold equilibria
    Solve {
        #[command(flatten)]
        source: Source,
        /// Print the parameters in config format and exit
        #[arg(long)]
        dump_config: bool,
    },
    /// Solve, then certify against the QVI system on a grid
    Verify {
        #[command(flatten)]
        source: Source,
        /// Number of grid points
        #[arg(long)]
        grid: Option<u64>,
    },
    /// Solve, certify, then Monte-Carlo-estimate the payoffs
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Starting points, comma-separated
        #[arg(long, value_delimiter = ',', required = true)]
        x0: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Simulate even if certification fails
        #[arg(long)]
        force: bool,
    },
    /// Re-solve along a parameter range and tabulate the thresholds
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Parameter to sweep: r, sigma, c, d, lambda, gamma, a, b, s, q
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
}

/// Run the CLI on the given argument list; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Solve { source, dump_config } => cmd_solve(&source, dump_config),
        Command::Verify { source, grid } => cmd_verify(&source, grid),
        Command::Simulate { source, x0, seed, paths, dt, force } => {
            cmd_simulate(&source, &x0, seed, paths, dt, force)
        }
        Command::Sweep { source, param, from, to, steps } => {
            cmd_sweep(&source, &param, from, to, steps)
        }
    }
}

fn load(source: &Source) -> Result<(GameParams, ConfigExtras), String> {
    match (&source.scenario, &source.config) {
        (Some(name), None) => {
            let sc = scenario::builtin(name).ok_or_else(|| {
                format!(
                    "unknown scenario `{name}`; built-ins: {}",
                    scenario::BUILTIN_NAMES.join(", ")
                )
            })?;
            Ok((sc.params, ConfigExtras::default()))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            scenario::parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
        }
        _ => Err("pass exactly one of --scenario or --config".into()),
    }
}

fn emit(source: &Source, csv: &str) -> Result<(), String> {
    match &source.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

/// 6 significant digits for human-facing numbers.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits_before = x.abs().log10().floor() as i32 + 1;
    let decimals = (6 - digits_before).max(0) as usize;
    format!("{x:.decimals$}")
}

struct Solved {
    type1: Result<Type1Equilibrium, crate::type1::Type1Error>,
    type2: Result<Type2Equilibrium, crate::type2::Type2Error>,
}

impl Solved {
    fn of(p: &GameParams) -> Solved {
        Solved { type1: solve_type1(p), type2: solve_type2(p) }
    }

    fn payoffs(&self, p: GameParams) -> Vec<PiecewisePayoff> {
        let mut out = Vec::new();
        if let Ok(eq) = &self.type1 {
            out.push(PiecewisePayoff::from_type1(eq, p));
        }
        if let Ok(eq) = &self.type2 {
            out.push(PiecewisePayoff::from_type2(eq, p));
        }
        out
    }
}

fn cmd_solve(source: &Source, dump_config: bool) -> Result<i32, String> {
    let (params, extras) = load(source)?;
    if dump_config {
        print!("{}", scenario::dump_config(&params, &extras));
        return Ok(EXIT_OK);
    }
    let solved = Solved::of(&params);
    let mut csv = String::from(
        "type,x1_bar,x1_star,x2_bar,z_tilde,w,c11,c12,c21,c22,conditions_ok\n",
    );
    match &solved.type1 {
        Ok(eq) => {
            println!("Type I equilibrium:");
            println!("  x1_bar  = {}", sig6(eq.x1_bar));
            println!("  x1_star = {}", sig6(eq.x1_star));
            println!("  x2_bar  = {}", sig6(eq.x2_bar));
            if source.verbose {
                println!("  z_tilde = {}", sig6(eq.z_tilde));
                println!("  w_tilde = {}", sig6(eq.w_tilde));
                println!(
                    "  coeffs  = ({}, {}, {}, {})",
                    sig6(eq.coeffs.c11),
                    sig6(eq.coeffs.c12),
                    sig6(eq.coeffs.c21),
                    sig6(eq.coeffs.c22)
                );
            }
            let _ = writeln!(
                csv,
                "type1,{},{},{},{},{},{},{},{},{},true",
                eq.x1_bar,
                eq.x1_star,
                eq.x2_bar,
                eq.z_tilde,
                eq.w_tilde,
                eq.coeffs.c11,
                eq.coeffs.c12,
                eq.coeffs.c21,
                eq.coeffs.c22
            );
        }
        Err(e) => {
            println!("Type I equilibrium: none ({e})");
        }
    }
    match &solved.type2 {
        Ok(eq) => {
            println!("Type II equilibrium:");
            println!("  x1_bar  = {}", sig6(eq.x1_bar));
            println!("  x2_bar  = {} (impulse target = stopping boundary)", sig6(eq.x2_bar));
            if source.verbose {
                println!("  w_hat   = {}", sig6(eq.w_hat));
                println!(
                    "  coeffs  = ({}, {}, {}, {})",
                    sig6(eq.coeffs.c11),
                    sig6(eq.coeffs.c12),
                    sig6(eq.coeffs.c21),
                    sig6(eq.coeffs.c22)
                );
            }
            let _ = writeln!(
                csv,
                "type2,{},{},{},,{},{},{},{},{},true",
                eq.x1_bar,
                eq.x2_bar,
                eq.x2_bar,
                eq.w_hat,
                eq.coeffs.c11,
                eq.coeffs.c12,
                eq.coeffs.c21,
                eq.coeffs.c22
            );
        }
        Err(e) => {
            println!("Type II equilibrium: none ({e})");
        }
    }
    let any = solved.type1.is_ok() || solved.type2.is_ok();
    if source.out.is_some() {
        emit(source, &csv)?;
    }
    Ok(if any { EXIT_OK } else { EXIT_NO_EQUILIBRIUM })
}

fn cmd_verify(source: &Source, grid: Option<u64>) -> Result<i32, String> {
    let (params, extras) = load(source)?;
    let n = grid.or(extras.grid).unwrap_or(10_000) as usize;
    let solved = Solved::of(&params);
    let pps = solved.payoffs(params);
    if pps.is_empty() {
        println!("no equilibrium to verify");
        return Ok(EXIT_NO_EQUILIBRIUM);
    }
    let mut all_ok = true;
    let mut csv = String::new();
    for pp in &pps {
        let spec = GridSpec { n, ..GridSpec::default_for(pp) };
        let report = qvi::verify(pp, spec, qvi::DEFAULT_TOL_ANALYTIC, qvi::DEFAULT_TOL_FD)
            .map_err(|e| e.to_string())?;
        println!(
            "{} equilibrium: {}",
            pp.kind(),
            if report.pass() { "certified" } else { "NOT certified" }
        );
        if source.verbose || !report.pass() {
            print!("{}", report.to_kv());
        }
        csv.push_str(&report.to_csv());
        all_ok &= report.pass();
    }
    if source.out.is_some() {
        emit(source, &csv)?;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_VERIFICATION })
}

fn cmd_simulate(
    source: &Source,
    x0s: &[f64],
    seed: Option<u64>,
    paths: Option<u64>,
    dt: Option<f64>,
    force: bool,
) -> Result<i32, String> {
    let (params, extras) = load(source)?;
    let solved = Solved::of(&params);
    let pps = solved.payoffs(params);
    // when both types exist, prefer Type I: its impulse target is interior,
    // so the strategy pair exercises both players
    let Some(pp) = pps.first() else {
        println!("no equilibrium to simulate");
        return Ok(EXIT_NO_EQUILIBRIUM);
    };
    let report = qvi::verify_default(pp);
    if !report.pass() {
        if !force {
            eprintln!(
                "{} equilibrium failed certification ({:?}); rerun with --force to simulate anyway",
                pp.kind(),
                report.failed()
            );
            return Ok(EXIT_VERIFICATION);
        }
        eprintln!("warning: simulating an uncertified equilibrium (--force)");
    }
    let seed = seed.or(extras.seed).unwrap_or(0);
    let dt = dt.or(extras.dt).unwrap_or(0.01);
    let n_paths = paths.or(extras.n_paths).unwrap_or(20_000);
    let horizon = extras.horizon.unwrap_or(1000f64.ln() / params.r());
    let cfg = SimConfig::new(dt, horizon, n_paths, seed, true, params.r())
        .map_err(|e| e.to_string())?;
    let strategy = ThresholdStrategy::from_payoff(pp);
    let mut csv =
        String::from("x0,j1_mean,j1_se,j2_mean,j2_se,w1,w2,n_paths,dt,T,seed\n");
    for &x0 in x0s {
        let est = simulate(x0, &strategy, &params, &cfg);
        if source.verbose {
            println!(
                "x0 = {}: j1 = {} +- {}, j2 = {} +- {} (W1 = {}, W2 = {})",
                sig6(x0),
                sig6(est.j1_mean),
                sig6(est.j1_se),
                sig6(est.j2_mean),
                sig6(est.j2_se),
                sig6(pp.w1(x0)),
                sig6(pp.w2(x0))
            );
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            x0,
            est.j1_mean,
            est.j1_se,
            est.j2_mean,
            est.j2_se,
            pp.w1(x0),
            pp.w2(x0),
            cfg.n_paths(),
            cfg.dt(),
            cfg.horizon(),
            cfg.seed
        );
    }
    emit(source, &csv)?;
    Ok(EXIT_OK)
}

const SWEEPABLE: [&str; 10] = ["r", "sigma", "c", "d", "lambda", "gamma", "a", "b", "s", "q"];

fn with_param(p: &GameParams, name: &str, value: f64) -> Result<GameParams, String> {
    let mut v = [
        p.r(),
        p.sigma(),
        p.c(),
        p.d(),
        p.lambda(),
        p.gamma(),
        p.a(),
        p.b(),
        p.s(),
        p.q(),
    ];
    let i = SWEEPABLE
        .iter()
        .position(|k| *k == name)
        .ok_or_else(|| format!("unknown parameter `{name}`; one of {}", SWEEPABLE.join(", ")))?;
    v[i] = value;
    GameParams::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9])
        .map_err(|e| e.to_string())
}

fn cmd_sweep(
    source: &Source,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<i32, String> {
    let (base, _) = load(source)?;
    if !SWEEPABLE.contains(&param) {
        return Err(format!(
            "unknown parameter `{param}`; one of {}",
            SWEEPABLE.join(", ")
        ));
    }
    if steps < 2 {
        return Err("need --steps >= 2".into());
    }
    let mut csv = String::from(
        "param,value,type1,type2,x1_bar,x1_star,x2_bar,z_tilde,w,reason\n",
    );
    for i in 0..steps {
        let value = from + (to - from) * i as f64 / (steps - 1) as f64;
        let row = match with_param(&base, param, value) {
            Err(reason) => format!("{param},{value},,,,,,,,{reason}\n"),
            Ok(p) => {
                let solved = Solved::of(&p);
                let t1 = solved.type1.is_ok();
                let t2 = solved.type2.is_ok();
                match (&solved.type1, &solved.type2) {
                    (Ok(eq), _) => format!(
                        "{param},{value},{t1},{t2},{},{},{},{},{},\n",
                        eq.x1_bar, eq.x1_star, eq.x2_bar, eq.z_tilde, eq.w_tilde
                    ),
                    (_, Ok(eq)) => format!(
                        "{param},{value},{t1},{t2},{},{},{},,{},\n",
                        eq.x1_bar, eq.x2_bar, eq.x2_bar, eq.w_hat
                    ),
                    (Err(e), Err(_)) => {
                        format!("{param},{value},false,false,,,,,,no equilibrium: {e}\n")
                    }
                }
            }
        };
        csv.push_str(&row);
    }
    emit(source, &csv)?;
    Ok(EXIT_OK)
}
