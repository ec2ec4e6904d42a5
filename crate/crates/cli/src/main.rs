//! `vbreceiver`: reproducible experiment runs writing CSV.
//!
//! Exit status: 0 on success, 1 on a configuration or I/O error, 2 when
//! `selftest` finds a disagreement.

mod args;
mod commands;
mod output;
mod selftest;

use args::ParseFailure;
use clap::error::ErrorKind;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match args::parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
        Err(ParseFailure::Config(e)) => {
            eprintln!("error: {e:#}\n\n{}", args::usage(""));
            return ExitCode::from(1);
        }
    };
    match commands::run(&cli.command) {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::SelftestFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
