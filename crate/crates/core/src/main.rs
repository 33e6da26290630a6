use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crib_memory::config::Config;
use crib_memory::sweep::{self, Experiment, SweepResult};
use crib_memory::CribError;

/// CRIB quantum-memory simulator: figure sweeps, oracle validation and
/// optimal-broadening search. Results are written as CSV.
#[derive(Parser)]
#[command(name = "crib", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set medium.nu=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// CSV destination; defaults to `output.path`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Efficiency versus optical depth, wide box broadening.
    Fig1(Common),
    /// Efficiency versus Lorentzian broadening width.
    Fig2(Common),
    /// Identical versus different pulse and broadening shapes.
    Fig4(Common),
    /// Storage-time decay from the initial line width.
    Decay(Common),
    /// Optimal broadening width.
    Optimize(Common),
    /// Time-domain oracle against the analytic solver.
    Validate(Common),
    /// Sweep of one configuration key (`sweep.param`, `sweep.values`).
    Custom(Common),
}

fn load(common: &Common) -> Result<Config, CribError> {
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for o in &common.overrides {
        cfg.set(o)?;
    }
    Ok(cfg)
}

fn emit(res: &SweepResult, cfg: &Config, out: Option<PathBuf>) -> Result<(), CribError> {
    let path = out.or_else(|| cfg.get("output.path").map(PathBuf::from));
    match path {
        Some(p) => {
            let file = File::create(&p).map_err(|e| CribError::Io(format!("{}: {e}", p.display())))?;
            res.write_csv(BufWriter::new(file), cfg)?;
            let mut stdout = io::stdout().lock();
            for line in &res.summary {
                writeln!(stdout, "{line}")?;
            }
            writeln!(stdout, "wrote {} rows to {}", res.rows.len(), p.display())?;
        }
        None => {
            res.write_csv(io::stdout().lock(), cfg)?;
            for line in &res.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn exit_code(e: &CribError) -> u8 {
    match e {
        CribError::InvalidConfig(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::Fig1(c) => (Experiment::Fig1, c),
        Command::Fig2(c) => (Experiment::Fig2, c),
        Command::Fig4(c) => (Experiment::Fig4, c),
        Command::Decay(c) => (Experiment::Decay, c),
        Command::Optimize(c) => (Experiment::Optimize, c),
        Command::Validate(c) => (Experiment::Validate, c),
        Command::Custom(c) => (Experiment::Custom, c),
    };
    let result = load(&common).and_then(|cfg| {
        let res = sweep::run(experiment, &cfg)?;
        emit(&res, &cfg, common.out.clone())?;
        Ok(res.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
