//! `disdel`: parameter tables, approximation scans, single runs and sweeps.

mod config;
mod error;
mod params;
mod report;
mod scan;
mod sweep;
mod table;

use clap::{Parser, Subcommand};
use error::{usage, CliResult};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "disdel", version, about = "Distributed-delay problems with exponential-sum kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Out {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quadrature parameters h, T, δ, M, N of a gamma or Pareto kernel.
    Params {
        #[command(flatten)]
        args: params::ParamsArgs,
        #[command(flatten)]
        out: Out,
    },
    /// Error scans of the exponential-sum approximation of t^{-α}.
    ApproxScan {
        #[command(flatten)]
        args: scan::ScanArgs,
        #[command(flatten)]
        out: Out,
    },
    /// Integrates one problem and reports the final state, error and statistics.
    Run(config::RunArgs),
    /// Runs the ε ladder of a predefined experiment.
    Sweep {
        #[command(flatten)]
        args: sweep::SweepArgs,
        #[command(flatten)]
        out: Out,
    },
}

fn emit(text: &str, out_file: Option<&PathBuf>) -> CliResult<()> {
    match out_file {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| usage(e.to_string()))
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Params { args, out } => emit(&params::cmd_params(&args)?.to_csv(), out.out_file.as_ref()),
        Command::ApproxScan { args, out } => {
            let (table, notes) = scan::cmd_approx_scan(&args)?;
            for n in notes {
                eprintln!("{n}");
            }
            emit(&table.to_csv(), out.out_file.as_ref())
        }
        Command::Run(args) => {
            let cfg = config::resolve(&args)?;
            let rep = report::cmd_run(&cfg)?;
            emit(&report::render(&rep, cfg.output), args.out_file.as_ref())
        }
        Command::Sweep { args, out } => emit(&sweep::cmd_sweep(&args)?.to_csv(), out.out_file.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("disdel: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
