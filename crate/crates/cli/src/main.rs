//! `osdyn`: command-line front end for the seasonal herbivore-vegetation
//! toolkit.
//!
//! Exit codes: `0` success, `1` configuration or usage error, `2` the
//! trajectory entered the singular reserve band, `3` a requested check is
//! inapplicable to the scenario, `4` no periodic orbit was found from any
//! seed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use osdyn_cli::{checks, config, load_workload, orbit, reduce, simulate, sweep};
use osdyn_cli::{CmdResult, Overrides};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Rk45,
    Rk4,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output path; siblings derive from it (`<stem>.summary.txt`, ...).
    #[arg(long)]
    out: PathBuf,
    /// Override the relative integration tolerance (absolute becomes
    /// tol/100).
    #[arg(long)]
    tol: Option<f64>,
    /// Override the integration scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Override the horizon (simulate/check/sweep) or set a warm-up flow
    /// before the orbit search, in periods.
    #[arg(long)]
    periods: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            tol: self.tol,
            scheme: self.scheme.map(|s| match s {
                SchemeArg::Rk45 => config::SchemeConfig::Rk45,
                SchemeArg::Rk4 => config::SchemeConfig::Rk4,
            }),
            periods: self.periods,
        }
    }
}

#[derive(Debug, Args)]
struct OrbitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Explicit seeds `v,h;v,h;...` or `grid:N` for an N x N lattice.
    #[arg(long)]
    seeds: Option<String>,
    /// Shorthand for `--seeds grid:N`.
    #[arg(long)]
    seed_grid: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// One or two knobs, each `<coef>.base:<lo>:<hi>:<count>` or
    /// `<coef>.segments.<i>.value:<lo>:<hi>:<count>`.
    #[arg(long = "knob", num_args = 1)]
    knobs: Vec<String>,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    /// Scenario file with a `raw_params` block.
    #[arg(long)]
    config: PathBuf,
    /// Where to write the equivalent `simplified_params` scenario.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Integrate the scenario and write a trajectory CSV plus a summary.
    Simulate(CommonArgs),
    /// Run every analytic condition check and write a report.
    Check(CommonArgs),
    /// Locate periodic orbits from seed states and classify them.
    Orbit(OrbitArgs),
    /// Grid a knob (or two) and re-run the checks at every point.
    Sweep(SweepArgs),
    /// Convert field-measured parameters to the compact form.
    Reduce(ReduceArgs),
}

/// Seasonal herbivore-vegetation model: simulation, condition checking,
/// periodic-orbit location, and parameter sweeps.
#[derive(Debug, Parser)]
#[command(name = "osdyn", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

fn run(cli: Cli) -> CmdResult {
    match cli.cmd {
        Cmd::Simulate(args) => {
            let w = load_workload(&args.config, &args.overrides())?;
            simulate::run(&w, &args.out)
        }
        Cmd::Check(args) => {
            let w = load_workload(&args.config, &args.overrides())?;
            checks::run_command(&w, &args.out)
        }
        Cmd::Orbit(args) => {
            let mut over = args.common.overrides();
            // For orbits, --periods means warm-up flow, not a horizon.
            let warmup = over.periods.take().unwrap_or(0.0);
            let w = load_workload(&args.common.config, &over)?;
            orbit::run(&w, &args.common.out, args.seeds.as_deref(), args.seed_grid, warmup)
        }
        Cmd::Sweep(args) => {
            let w = load_workload(&args.common.config, &args.common.overrides())?;
            sweep::run(&w, &args.common.out, &args.knobs)
        }
        Cmd::Reduce(args) => reduce::run(&args.config, &args.out),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(i32::from(f.code));
        }
    }
}
