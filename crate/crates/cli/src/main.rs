//! `cellfree`: run energy-efficiency scenarios from a TOML file.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 no feasible point in the whole run.

use std::path::PathBuf;
use std::process::ExitCode;

use cellfree_core::config::{ConfigError, Mode, ScenarioConfig};
use cellfree_core::harness::{run_scenario, HarnessError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cellfree", version, about = "Energy-efficient cell-free massive MIMO with quantized backhaul")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize energy efficiency and compare with equal power.
    Optimize(RunArgs),
    /// Evaluate only the equal-power reference.
    Baseline(RunArgs),
    /// Check the closed-form SINR terms by Monte-Carlo simulation.
    Validate(RunArgs),
    /// Write the optimal quantizer table for 1 to 7 bits.
    Table1(RunArgs),
    /// Optimize over every point of the configured sweep.
    Sweep(RunArgs),
    /// Print the resolved configuration as TOML.
    PrintConfig(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed of the first network realization.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Write the per-iteration SCA trace.
    #[arg(long)]
    debug_trace: bool,
}

impl RunArgs {
    fn resolve(&self, mode: Option<Mode>) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(m) = mode {
            cfg.mode = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        cfg.debug_trace |= self.debug_trace;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, mode) = match &cli.command {
        Command::Optimize(a) => (a, Some(Mode::Optimize)),
        Command::Baseline(a) => (a, Some(Mode::Baseline)),
        Command::Validate(a) => (a, Some(Mode::Validate)),
        Command::Table1(a) => (a, Some(Mode::Table1)),
        Command::Sweep(a) => (a, Some(Mode::Sweep)),
        Command::PrintConfig(a) => (a, None),
    };
    let cfg = match args.resolve(mode) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Command::PrintConfig(_) = cli.command {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    match run_scenario(&cfg) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            println!("{} of {} rows ok", report.rows_ok, report.rows);
            if report.infeasible_everywhere() {
                eprintln!("error: no feasible point");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(HarnessError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
