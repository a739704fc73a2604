//! `rotforge`: distillation, dilution and synthesis costs for small-angle rotations.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "rotforge", version, about, propagate_version = true)]
#[command(after_help = "Data goes to stdout, diagnostics to stderr. ROTFORGE_THREADS caps worker threads.\n\
Exit status: 0 on success, 1 when `verify` finds a failing check, 2 on bad input or any other error.")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Overrides for the run configuration, valid with every subcommand.
#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Error of raw magic states at every level.
    #[arg(long = "raw", visible_alias = "eps-raw", global = true, value_name = "EPS")]
    eps_raw: Option<f64>,
    /// Highest level in the cost tables.
    #[arg(long, global = true, value_name = "L")]
    l_max: Option<u32>,
    /// Target error; repeat for several.
    #[arg(long = "target", global = true, value_name = "EPS")]
    targets: Vec<f64>,
    /// Error buckets per decade in the cost tables.
    #[arg(long, global = true, value_name = "N")]
    grid: Option<u32>,
    /// Seed for the Monte Carlo check.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON list of level-3 protocols replacing the built-in set.
    #[arg(long, global = true, value_name = "PATH")]
    protocols: Option<PathBuf>,
    /// CSV of tabulated synthesis counts (`epsilon,tcount[,angle]`).
    #[arg(long, global = true, value_name = "PATH")]
    sr_table: Option<PathBuf>,
    /// Output format [default: csv for sweep, json otherwise].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the invariant suite; exits 1 if any check fails.
    Verify(commands::VerifyArgs),
    /// Exact output error and acceptance of one round.
    Simulate(commands::SimulateArgs),
    /// Cheapest recipe for a state or rotation at one level.
    Cost(commands::CostArgs),
    /// Rotation cost against level, with the synthesis comparators.
    Sweep(commands::SweepArgs),
    /// T-count and rotation cost of gate synthesis.
    Synth(commands::SynthArgs),
    /// Nearest multiple of θ_ℓ to an angle.
    Angle(commands::AngleArgs),
    /// Mix a level-ℓ state with |+⟩.
    Dilute(commands::DiluteArgs),
}

impl GlobalArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.eps_raw {
            cfg.eps_raw = v;
        }
        if let Some(v) = self.l_max {
            cfg.l_max = v;
        }
        if !self.targets.is_empty() {
            cfg.targets = self.targets.clone();
        }
        if let Some(v) = self.grid {
            cfg.grid = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.protocols {
            cfg.protocols = Some(v.clone());
        }
        if let Some(v) = &self.sr_table {
            cfg.sr_table = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.format = Some(v);
        }
        Ok(cfg)
    }
}

/// Faults a test run can plant in the circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    FlipPivotSign,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> anyhow::Result<bool> {
        let mut cfg = cli.global.resolve()?;
        if let Command::Sweep(a) = &cli.command {
            a.apply(&mut cfg)?;
        }
        cfg.validate()?;
        let mut out = std::io::stdout().lock();
        match &cli.command {
            Command::Verify(a) => commands::verify(&cfg, a, &mut out),
            Command::Simulate(a) => commands::simulate(&cfg, a, &mut out).map(|_| true),
            Command::Cost(a) => commands::cost(&cfg, a, &mut out).map(|_| true),
            Command::Sweep(a) => commands::sweep(&cfg, a, &mut out).map(|_| true),
            Command::Synth(a) => commands::synth(&cfg, a, &mut out).map(|_| true),
            Command::Angle(a) => commands::angle(&cfg, a, &mut out).map(|_| true),
            Command::Dilute(a) => commands::dilute(&cfg, a, &mut out).map(|_| true),
        }
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
