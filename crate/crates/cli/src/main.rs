//! `reserve`: reserve prices for loss-averse bidders, from the command line.
//!
//! Every command writes CSV to standard output or `--out`. Exit codes: 0 on
//! success, 2 for invalid input, 3 when a numerical routine fails.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{expand_config, Cli, Command, Usage};

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::BidCurve(a) => commands::bid_curve(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::SweepN(a) => commands::sweep_n(a),
        Command::SecretScheme(a) => commands::secret_scheme(a),
        Command::Tioli(a) => commands::tioli(a),
        Command::Compare(a) => commands::compare(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::VerifyUpe(a) => commands::verify_upe(a),
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        let io = e.downcast_ref::<std::io::Error>().or_else(|| {
            match e.downcast_ref::<csv::Error>()?.kind() {
                csv::ErrorKind::Io(io) => Some(io),
                _ => None,
            }
        });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<reserve_core::Error>() {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
