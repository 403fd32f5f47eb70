//! Thin command-line front end over `jcladder::scenarios`.
//!
//! Exit codes: 0 success, 1 invariant check failed, 2 usage or config error,
//! 3 numerical failure, 4 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use jcladder::checks::run_checks;
use jcladder::scenarios::{
    emit_outputs, run_evolve, run_fig1, run_fig2, run_steady, with_threads, worker_threads, ResultTable, ScenarioConfig,
    Status,
};
use jcladder::{Error, ErrorCategory};

#[derive(Parser)]
#[command(name = "jcbench", about = "Open Jaynes-Cummings benchmark: Lindblad vs NHQM vs corrected NHEH")]
struct Cli {
    /// Run the built-in invariant suite (before the subcommand, if any).
    #[arg(long)]
    check: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Io {
    /// Scenario file; the built-in default for the subcommand when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `outputs` in the scenario file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation sweep over the initial mixture weight.
    Fig1(Io),
    /// Steady-state fidelity sweep over the pump rate.
    Fig2(Io),
    /// Single trajectory per listed solver.
    Evolve(Io),
    /// Single steady state per listed solver.
    Steady(Io),
}

fn exit_for(e: &Error) -> ExitCode {
    match e.category() {
        ErrorCategory::Config => ExitCode::from(2),
        ErrorCategory::Numerical => ExitCode::from(3),
        ErrorCategory::Io => ExitCode::from(4),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.check {
        match run_checks() {
            Ok(results) => {
                let mut ok = true;
                for r in &results {
                    println!("{r}");
                    ok &= r.passed;
                }
                if !ok {
                    return ExitCode::from(1);
                }
            }
            Err(e) => {
                eprintln!("jcbench: check suite aborted: {e}");
                return exit_for(&e);
            }
        }
    }
    let Some(cmd) = cli.command else {
        return ExitCode::SUCCESS;
    };
    let (name, io) = match &cmd {
        Command::Fig1(io) => ("fig1", io),
        Command::Fig2(io) => ("fig2", io),
        Command::Evolve(io) => ("evolve", io),
        Command::Steady(io) => ("steady", io),
    };
    let cfg = match &io.config {
        Some(path) => ScenarioConfig::load(path),
        None => Ok(match name {
            "fig1" => ScenarioConfig::fig1_default(),
            "fig2" => ScenarioConfig::fig2_default(),
            _ => {
                let mut c = ScenarioConfig::fig1_default();
                c.name = name.into();
                c.sweep = None;
                c.tracked.clear();
                c
            }
        }),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("jcbench: {e}");
            return exit_for(&e);
        }
    };
    let out = io.out.clone().unwrap_or_else(|| cfg.outputs.clone());
    let start = Instant::now();
    let threads = worker_threads();
    let result = with_threads(threads, || -> Result<Vec<PathBuf>, Error> {
        let emitted = match name {
            "fig1" => {
                let r = run_fig1(&cfg)?;
                for row in r.rows.iter().filter(|r| matches!(r.status, Status::Failed(_))) {
                    eprintln!("jcbench: alpha {} {}: {}", row.alpha, row.pair_label(), row.status);
                }
                emit_outputs(&ResultTable::Fig1(&r), &cfg, &out, start.elapsed().as_secs_f64())?
            }
            "fig2" => {
                let r = run_fig2(&cfg)?;
                for row in r.rows.iter().filter(|r| matches!(r.status, Status::Failed(_))) {
                    eprintln!("jcbench: pump {} {}: {}", row.pump, row.method, row.status);
                }
                emit_outputs(&ResultTable::Fig2(&r), &cfg, &out, start.elapsed().as_secs_f64())?
            }
            "evolve" => {
                let r = run_evolve(&cfg)?;
                emit_outputs(&ResultTable::Evolve(&r), &cfg, &out, start.elapsed().as_secs_f64())?
            }
            _ => {
                let r = run_steady(&cfg)?;
                emit_outputs(&ResultTable::Steady(&r), &cfg, &out, start.elapsed().as_secs_f64())?
            }
        };
        Ok(emitted.files)
    });
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("jcbench: {e}");
            exit_for(&e)
        }
    }
}
