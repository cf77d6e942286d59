//! `groundscale` command-line frontend.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, UsageError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
