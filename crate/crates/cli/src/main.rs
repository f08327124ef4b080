//! `qctl-qbf`: QCTL model checking through QBF reductions.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Property holds.
pub const EXIT_HOLDS: u8 = 0;
/// Property fails.
pub const EXIT_FAILS: u8 = 1;
/// Usage or input error.
pub const EXIT_ERROR: u8 = 2;
/// Timeout or inconclusive answer.
pub const EXIT_UNKNOWN: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_HOLDS
            });
        }
    };
    let result = match cli.command {
        Command::Check(a) => commands::check(a),
        Command::Translate(a) => commands::translate(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Gen(a) => commands::gen(a),
        Command::Bench(a) => commands::bench(a),
        Command::SmlCheck(a) => commands::sml_check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
