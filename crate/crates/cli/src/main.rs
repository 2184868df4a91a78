//! `fcurv`: generate fractal images, measure parallel-set functionals and
//! estimate the Minkowski dimension and fractal curvatures.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use fractal_curvatures::Error;

use crate::args::{Cli, Command};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_)) => EXIT_USAGE,
        Some(Error::DegenerateDesign(_) | Error::NoSignificantPeriod { .. } | Error::Numeric(_)) => {
            EXIT_NUMERIC
        }
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Measure(a) => commands::measure(a),
        Command::Estimate(a) => commands::estimate_cmd(a),
        Command::Periodogram(a) => commands::periodogram_cmd(a),
        Command::Lab(a) => commands::lab(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
