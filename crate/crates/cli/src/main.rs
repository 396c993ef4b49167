//! `memdim`: command-line front end for memdim-core.
//!
//! Settings are resolved as built-in defaults, then the `--config` JSON
//! file, then `MEMDIM_*` environment variables, then flags. Exit codes:
//! 0 success, 1 i/o failure, 2 config error, 3 numerical blow-up,
//! 4 empty result.

mod commands;
mod config;
mod failure;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memdim_core::{Method, Route, StateVector};

use config::{parse_state, Format, RunConfig, SweepAxis};
use failure::{CmdResult, Failure};

#[derive(Parser)]
#[command(name = "memdim", version, about = "Lyapunov dimension and attractor analysis for the Chua memristor system")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true, env = "MEMDIM_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, env = "MEMDIM_OUT")]
    out: Option<PathBuf>,
    /// Format of tabular outputs; reports are always JSON.
    #[arg(long, global = true, value_enum, env = "MEMDIM_FORMAT")]
    format: Option<Format>,
    /// Seed for probe placement in `classify`.
    #[arg(long, global = true, env = "MEMDIM_SEED")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MEMDIM_JOBS")]
    jobs: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true, env = "MEMDIM_ALPHA")]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true, env = "MEMDIM_BETA")]
    beta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true, env = "MEMDIM_GAMMA")]
    gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true, env = "MEMDIM_M0")]
    m0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true, env = "MEMDIM_M1")]
    m1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true, env = "MEMDIM_X0")]
    x0: Option<f64>,
    #[arg(long, global = true, value_enum, env = "MEMDIM_METHOD")]
    method: Option<MethodArg>,
    /// Step size (initial step for the adaptive method).
    #[arg(long, global = true, env = "MEMDIM_DT")]
    dt: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Rk45,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Benettin,
    Svd,
}

#[derive(Args)]
struct Run {
    /// Integration horizon.
    #[arg(long)]
    t: Option<f64>,
    /// Initial condition `x,y,z`.
    #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
    u0: Option<StateVector>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write `t,x,y,z` samples.
    Simulate(Run),
    /// Finite-time Lyapunov exponents along one trajectory.
    Lyapunov {
        #[command(flatten)]
        run: Run,
        #[arg(long, value_enum)]
        route: Option<RouteArg>,
    },
    /// Sample the attractor and compute local and set dimensions.
    Dimension,
    /// Analytic dimension bounds, certificate search and entropy bound.
    Bound,
    /// Global convergence certificate.
    Converge,
    /// Self-excited / hidden-candidate classification of the sampled attractor.
    Classify {
        /// Also write every probe trajectory to probes.csv.
        #[arg(long)]
        dump_probes: bool,
    },
    /// Equilibria with their linear stability.
    Equilibria,
    /// Parameter grid over one or two axes.
    Sweep {
        /// `name:start:stop:count`; replaces the config's axes when given.
        #[arg(long = "axis", allow_hyphen_values = true)]
        axes: Vec<SweepAxis>,
        /// Continue from an existing journal in the output directory.
        #[arg(long)]
        resume: bool,
        /// Process at most this many new grid points in this run.
        #[arg(long)]
        limit: Option<usize>,
        /// Classify every grid point (slow).
        #[arg(long)]
        classify: bool,
    },
}

fn resolve(cli: &Cli) -> CmdResult<RunConfig> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let p = &mut cfg.parameters;
    for (slot, v) in [
        (&mut p.alpha, c.alpha),
        (&mut p.beta, c.beta),
        (&mut p.gamma, c.gamma),
        (&mut p.m0, c.m0),
        (&mut p.m1, c.m1),
        (&mut p.x0, c.x0),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(m) = c.method {
        cfg.integrator.method = match m {
            MethodArg::Rk4 => Method::FixedRk4,
            MethodArg::Rk45 => Method::AdaptiveRk45,
        };
    }
    if let Some(dt) = c.dt {
        cfg.integrator.dt = dt;
    }
    if let Some(seed) = c.seed {
        cfg.classification.rng_seed = seed;
    }
    if let Some(out) = &c.out {
        cfg.output.dir = out.clone();
    }
    if c.format.is_some() {
        cfg.output.format = c.format;
    }
    match &cli.command {
        Command::Simulate(run) => {
            cfg.simulate.t = run.t.unwrap_or(cfg.simulate.t);
            cfg.simulate.u0 = run.u0.unwrap_or(cfg.simulate.u0);
        }
        Command::Lyapunov { run, route } => {
            cfg.lyapunov.t = run.t.unwrap_or(cfg.lyapunov.t);
            cfg.lyapunov.u0 = run.u0.unwrap_or(cfg.lyapunov.u0);
            if let Some(r) = route {
                cfg.lyapunov.route = match r {
                    RouteArg::Benettin => Route::Benettin,
                    RouteArg::Svd => Route::Svd,
                };
            }
        }
        Command::Sweep { axes, classify, .. } => {
            if !axes.is_empty() {
                cfg.sweep.axes = axes.clone();
            }
            cfg.sweep.classify |= classify;
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> CmdResult<Vec<PathBuf>> {
    let cfg = resolve(cli)?;
    if let Some(jobs) = cli.common.jobs {
        if jobs == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Io(e.into()))?;
    }
    std::fs::create_dir_all(&cfg.output.dir)?;
    match &cli.command {
        Command::Simulate(_) => commands::simulate(&cfg),
        Command::Lyapunov { .. } => commands::lyapunov(&cfg),
        Command::Dimension => commands::dimension(&cfg),
        Command::Bound => commands::bound(&cfg),
        Command::Converge => commands::converge(&cfg),
        Command::Classify { dump_probes } => commands::classify_cmd(&cfg, *dump_probes),
        Command::Equilibria => commands::equilibria_cmd(&cfg),
        Command::Sweep { resume, limit, .. } => {
            sweep::run(&cfg, &sweep::SweepOptions { resume: *resume, limit: *limit })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("memdim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
